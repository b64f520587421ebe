//! The doubled linearized operator `F' = D + δA` on a truncated box: Schur
//! reduction onto the characteristic rows, block decomposition, inversion with
//! norm/decay certificates, and the `θ`-shifted family `T(θ)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::characteristics::SiteBox;
use crate::error::{Error, Result};
use crate::lattice::{ProblemSpec, SiteIndex, SparseSeries};
use crate::symbols::{Comp, Symbols};
use crate::unionfind::UnionFind;

/// Largest index set handed to a dense solve.
pub const DEFAULT_BLOCK_LIMIT: usize = 6_000;

/// Row/column label of the doubled operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Idx {
    pub site: SiteIndex,
    pub comp: Comp,
}

impl Idx {
    pub fn new(site: SiteIndex, comp: Comp) -> Self {
        Self { site, comp }
    }

    pub fn u(site: SiteIndex) -> Self {
        Self::new(site, Comp::U)
    }

    pub fn v(site: SiteIndex) -> Self {
        Self::new(site, Comp::V)
    }
}

impl fmt::Display for Idx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.comp, self.site)
    }
}

/// `F'(u, v)` at frequency `ω`, evaluated entrywise on demand.
///
/// `D(U at (n,j)) = n.ω + |j|² + m + θ`, `D(V at (n,j)) = -n.ω + |j|² + m - θ`;
/// the coupling is `δ` times the symbol selected by the row/column components.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub delta: f64,
    pub omega: Vec<f64>,
    pub phase: f64,
    pub theta: f64,
    pub sbox: SiteBox,
    pub symbols: Symbols,
}

impl BlockOperator {
    pub fn assemble(
        u: &SparseSeries,
        v: &SparseSeries,
        omega: &[f64],
        spec: &ProblemSpec,
        sbox: SiteBox,
    ) -> Result<Self> {
        if omega.len() != spec.b() {
            return Err(Error::DimensionMismatch {
                b: spec.b(),
                d: spec.d,
                got_b: omega.len(),
                got_d: spec.d,
            });
        }
        u.check_compatible(v)?;
        Ok(Self {
            delta: spec.delta,
            omega: omega.to_vec(),
            phase: spec.phase_m,
            theta: 0.0,
            sbox,
            symbols: Symbols::new(u, v, spec.p)?,
        })
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Diagonal of `D` without the `θ` shift.
    pub fn base_diagonal(&self, idx: &Idx) -> f64 {
        let nw = idx.site.n_dot_f(&self.omega);
        let j2 = idx.site.j_sq() as f64;
        match idx.comp {
            Comp::U => nw + j2 + self.phase,
            Comp::V => -nw + j2 + self.phase,
        }
    }

    pub fn diagonal(&self, idx: &Idx) -> f64 {
        self.base_diagonal(idx)
            + match idx.comp {
                Comp::U => self.theta,
                Comp::V => -self.theta,
            }
    }

    /// Rows whose diagonal vanishes at the integer frequency (`|D| < 1/2`).
    pub fn is_characteristic(&self, idx: &Idx) -> bool {
        self.base_diagonal(idx).abs() < 0.5
    }

    pub fn entry(&self, row: &Idx, col: &Idx) -> Complex64 {
        let diff = &row.site - &col.site;
        let mut e = self.symbols.coefficient(row.comp, col.comp, &diff) * self.delta;
        if row == col {
            e += self.diagonal(row);
        }
        e
    }

    /// Nonzero entries of one row inside the box, the diagonal included.
    pub fn row(&self, idx: &Idx) -> Vec<(Idx, Complex64)> {
        let mut out: Vec<(Idx, Complex64)> = Vec::new();
        let mut diag = Complex64::new(self.diagonal(idx), 0.0);
        for col in [Comp::U, Comp::V] {
            let pre = self.symbols.prefactor(idx.comp, col) * self.delta;
            for (g, c) in self.symbols.series(idx.comp, col).iter() {
                let y = Idx::new(&idx.site - g, col);
                if y == *idx {
                    diag += c * pre;
                } else if self.sbox.contains(&y.site) {
                    out.push((y, c * pre));
                }
            }
        }
        out.push((idx.clone(), diag));
        out
    }

    /// Indices connected to `seeds` inside the box, skipping `exclude`.
    pub fn reachable(&self, seeds: &[Idx], exclude: &HashSet<Idx>, limit: usize) -> Result<Vec<Idx>> {
        let mut seen: HashSet<Idx> = HashSet::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if self.sbox.contains(&s.site) && !exclude.contains(s) && seen.insert(s.clone()) {
                queue.push_back(s.clone());
            }
        }
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.row(&x) {
                if !exclude.contains(&y) && seen.insert(y.clone()) {
                    if seen.len() > limit {
                        return Err(Error::BlockTooLarge {
                            size: seen.len(),
                            limit,
                        });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut out: Vec<Idx> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// Every index of the box (both components), for small boxes.
    pub fn box_indices(&self, b: usize, d: usize, cap: usize) -> Result<Vec<Idx>> {
        self.sbox.check_cap(b, d, cap / 2)?;
        let mut out = Vec::new();
        for s in self.sbox.sites(b, d) {
            out.push(Idx::u(s.clone()));
            out.push(Idx::v(s));
        }
        out.sort();
        Ok(out)
    }

    /// Connected components of the sparsity graph restricted to `set`.
    pub fn components(&self, set: &[Idx]) -> Vec<Vec<Idx>> {
        let pos: HashMap<&Idx, usize> = set.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut uf = UnionFind::new(set.len());
        for (i, x) in set.iter().enumerate() {
            for (y, _) in self.row(x) {
                if let Some(&k) = pos.get(&y) {
                    uf.union(i, k);
                }
            }
        }
        uf.groups()
            .into_iter()
            .map(|g| g.into_iter().map(|i| set[i].clone()).collect())
            .collect()
    }

    /// `F' - λ` restricted to `set` (rows and columns in the order of `set`).
    pub fn dense(&self, set: &[Idx], lambda: f64) -> DMatrix<Complex64> {
        let pos: HashMap<&Idx, usize> = set.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut m = DMatrix::zeros(set.len(), set.len());
        for (i, x) in set.iter().enumerate() {
            for (y, c) in self.row(x) {
                if let Some(&k) = pos.get(&y) {
                    m[(i, k)] += c;
                }
            }
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn split_characteristic(&self, set: &[Idx]) -> (Vec<Idx>, Vec<Idx>) {
        set.iter().cloned().partition(|x| self.is_characteristic(x))
    }
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn min_singular_value(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn invert(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { size: m.nrows() })
}

fn submatrix(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, k| m[(rows[i], cols[k])])
}

/// The effective operator on the characteristic rows of an index set.
#[derive(Debug, Clone)]
pub struct SchurComplement {
    pub characteristic: Vec<Idx>,
    /// `P F' P - λ`.
    pub direct: DMatrix<Complex64>,
    /// `H = P F' P - λ - P F' P^c (P^c F' P^c - λ)^{-1} P^c F' P`.
    pub effective: DMatrix<Complex64>,
    pub correction_norm: f64,
    /// Smallest `|D - λ|` over `P^c`.
    pub min_offdiag_diagonal: f64,
}

pub fn schur_complement(op: &BlockOperator, set: &[Idx], lambda: f64) -> Result<SchurComplement> {
    let m = op.dense(set, lambda);
    let (p_idx, q_idx): (Vec<usize>, Vec<usize>) =
        (0..set.len()).partition(|&i| op.is_characteristic(&set[i]));
    let mut min_diag = f64::INFINITY;
    let mut worst = None;
    for &i in &q_idx {
        let v = (op.diagonal(&set[i]) - lambda).abs();
        if v < min_diag {
            min_diag = v;
            worst = Some(i);
        }
    }
    if min_diag <= 0.5 - 1e-12 {
        return Err(Error::IllConditioned {
            min_diagonal: min_diag,
            site: worst.map(|i| set[i].to_string()).unwrap_or_default(),
        });
    }
    let pp = submatrix(&m, &p_idx, &p_idx);
    let correction = if q_idx.is_empty() || p_idx.is_empty() {
        DMatrix::zeros(p_idx.len(), p_idx.len())
    } else {
        let pq = submatrix(&m, &p_idx, &q_idx);
        let qp = submatrix(&m, &q_idx, &p_idx);
        let qq = submatrix(&m, &q_idx, &q_idx);
        let sol = qq
            .lu()
            .solve(&qp)
            .ok_or(Error::Singular { size: q_idx.len() })?;
        pq * sol
    };
    let effective = &pp - &correction;
    Ok(SchurComplement {
        characteristic: p_idx.iter().map(|&i| set[i].clone()).collect(),
        direct: pp,
        effective,
        correction_norm: spectral_norm(&correction),
        min_offdiag_diagonal: min_diag,
    })
}

/// One block `Γ_k` of `P F' P` on a component of the characteristic rows.
#[derive(Debug, Clone)]
pub struct Block {
    pub indices: Vec<Idx>,
    pub matrix: DMatrix<Complex64>,
    pub det: Complex64,
    /// Eigenvalues of the Hermitian block, ascending.
    pub eigenvalues: Vec<f64>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// `|det Γ_k| / δ^size`, independent of `δ` at the first step.
    pub fn normalized_det(&self, delta: f64) -> f64 {
        self.det.norm() / delta.powi(self.size() as i32)
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| e.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).max().unwrap_or(0)
    }

    /// Block with the smallest normalized determinant.
    pub fn weakest(&self, delta: f64) -> Option<(usize, f64)> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.normalized_det(delta)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn block_containing(&self, idx: &Idx) -> Option<&Block> {
        self.blocks.iter().find(|b| b.indices.contains(idx))
    }
}

/// `P F' P` on the characteristic rows of `set`, split into components.
///
/// At `ω⁽⁰⁾` the diagonal vanishes on these rows and `Γ_k = δA_k`; at a
/// modulated `ω` the diagonal carries `±n.Δω`.
pub fn block_decompose(op: &BlockOperator, set: &[Idx]) -> BlockDecomposition {
    let (p, _) = op.split_characteristic(set);
    let blocks = op
        .components(&p)
        .into_par_iter()
        .map(|indices| {
            let matrix = op.dense(&indices, 0.0);
            let det = matrix.determinant();
            let herm = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
            let mut eigenvalues: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
            eigenvalues.sort_by(f64::total_cmp);
            Block {
                indices,
                matrix,
                det,
                eigenvalues,
            }
        })
        .collect();
    BlockDecomposition { blocks }
}

/// Least-squares fit of `log|G(x,y)|` against `|x-y| |log δ|` and the
/// certified exponent `β` with `|G(x,y)| <= δ^{β|x-y|}` for `|x-y| > 1/β²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Negative slope of the fit.
    pub beta_fit: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// Largest `β <= beta_fit` (on a 1e-3 grid) for which the bound holds.
    pub beta_certified: f64,
    pub samples: usize,
    pub max_distance: i64,
    /// Entries below this modulus are rounding noise and are not used.
    pub noise_floor: f64,
    /// Resolved entries with distance `> 1/β_certified²` that were checked.
    pub checked_far: usize,
}

/// `(distance, |entry|)` samples.
pub fn fit_decay(samples: &[(i64, f64)], delta: f64, noise_floor: f64) -> DecayFit {
    let ld = delta.ln().abs();
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v > noise_floor)
        .map(|&(r, v)| (r as f64 * ld, v.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mut slope, mut intercept, mut rms) = (0.0, 0.0, 0.0);
    if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            slope = sxy / sxx;
        }
        intercept = my - slope * mx;
        rms = (pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
    }
    let beta_fit = -slope;
    let resolved: Vec<(i64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, v)| *v > noise_floor)
        .collect();
    let holds = |beta: f64| -> (bool, usize) {
        let cutoff = 1.0 / (beta * beta);
        let mut checked = 0;
        for &(r, v) in &resolved {
            if r as f64 > cutoff {
                checked += 1;
                if v > delta.powf(beta * r as f64) {
                    return (false, checked);
                }
            }
        }
        (true, checked)
    };
    let mut beta_certified = 0.0;
    let mut checked_far = 0;
    let mut k = (beta_fit * 1000.0).floor() as i64;
    while k > 0 {
        let beta = k as f64 / 1000.0;
        let (ok, c) = holds(beta);
        if ok {
            beta_certified = beta;
            checked_far = c;
            break;
        }
        k -= 1;
    }
    DecayFit {
        beta_fit,
        intercept,
        rms_residual: rms,
        beta_certified,
        samples: pts.len(),
        max_distance: samples.iter().map(|s| s.0).max().unwrap_or(0),
        noise_floor,
        checked_far,
    }
}

/// Dense inverse of `F' - λ` on each component of an index set.
#[derive(Debug, Clone)]
pub struct InverseCertificate {
    pub components: Vec<(Vec<Idx>, DMatrix<Complex64>)>,
    /// `max_k 1/σ_min` over components: the operator norm of the inverse.
    pub norm: f64,
    pub decay: DecayFit,
}

impl InverseCertificate {
    /// Applies the inverse to a vector given on (a subset of) the index set.
    pub fn apply(&self, rhs: &HashMap<Idx, Complex64>) -> HashMap<Idx, Complex64> {
        let mut out = HashMap::new();
        for (idx, inv) in &self.components {
            let b = nalgebra::DVector::from_iterator(
                idx.len(),
                idx.iter()
                    .map(|x| rhs.get(x).copied().unwrap_or(Complex64::new(0.0, 0.0))),
            );
            if b.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let x = inv * b;
            for (i, key) in idx.iter().enumerate() {
                out.insert(key.clone(), x[i]);
            }
        }
        out
    }

    pub fn entry(&self, row: &Idx, col: &Idx) -> Complex64 {
        for (idx, inv) in &self.components {
            if let (Some(i), Some(k)) = (
                idx.iter().position(|x| x == row),
                idx.iter().position(|x| x == col),
            ) {
                return inv[(i, k)];
            }
        }
        Complex64::new(0.0, 0.0)
    }
}

/// Inverse of `F' - λ` per component: the norm from the smallest singular
/// value, the applier from a direct factorization, and the decay samples
/// from the resolvent expansion (falling back to the factorization, with
/// entries below its rounding floor discarded, where the expansion diverges).
pub fn invert_with_certificates(
    op: &BlockOperator,
    set: &[Idx],
    lambda: f64,
) -> Result<InverseCertificate> {
    let comps = op.components(set);
    type Solved = (Vec<Idx>, DMatrix<Complex64>, f64, Option<DMatrix<Complex64>>);
    let solved: Vec<Result<Solved>> = comps
        .into_par_iter()
        .map(|idx| {
            let m = op.dense(&idx, lambda);
            let smin = min_singular_value(&m);
            if !(smin > 0.0) {
                return Err(Error::Singular { size: idx.len() });
            }
            let inv = invert(&m)?;
            let accurate = resolvent_inverse(op, &idx, lambda, 1e-13)?;
            Ok((idx, inv, 1.0 / smin, accurate))
        })
        .collect();
    let mut components = Vec::new();
    let mut norm: f64 = 0.0;
    let mut samples = Vec::new();
    let mut max_entry: f64 = 0.0;
    let mut largest = 1usize;
    let mut direct_samples = Vec::new();
    let mut all_accurate = true;
    for r in solved {
        let (idx, inv, nrm, accurate) = r?;
        norm = norm.max(nrm);
        largest = largest.max(idx.len());
        all_accurate &= accurate.is_some();
        let src = accurate.as_ref().unwrap_or(&inv);
        for i in 0..idx.len() {
            for k in 0..idx.len() {
                let r = (&idx[i].site - &idx[k].site).l1();
                max_entry = max_entry.max(inv[(i, k)].norm());
                direct_samples.push((r, inv[(i, k)].norm()));
                samples.push((r, src[(i, k)].norm()));
            }
        }
        components.push((idx, inv));
    }
    let decay = if all_accurate {
        fit_decay(&samples, op.delta, f64::MIN_POSITIVE)
    } else {
        let floor = 64.0 * f64::EPSILON * max_entry * largest as f64;
        fit_decay(&direct_samples, op.delta, floor)
    };
    Ok(InverseCertificate {
        components,
        norm,
        decay,
    })
}

/// `F̃ = (⊕ characteristic blocks) ⊕ (off-characteristic diagonal)` and
/// `Γ = F' - F̃` on one index set.
fn resolvent_split(
    op: &BlockOperator,
    set: &[Idx],
    lambda: f64,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let m = op.dense(set, lambda);
    let (p, _) = op.split_characteristic(set);
    let mut block_of: HashMap<&Idx, usize> = HashMap::new();
    for (k, comp) in op.components(&p).iter().enumerate() {
        for x in comp {
            if let Some(y) = set.iter().find(|y| *y == x) {
                block_of.insert(y, k);
            }
        }
    }
    let mut ft = DMatrix::zeros(set.len(), set.len());
    for i in 0..set.len() {
        for k in 0..set.len() {
            let keep = i == k
                || matches!(
                    (block_of.get(&set[i]), block_of.get(&set[k])),
                    (Some(a), Some(b)) if a == b
                );
            if keep {
                ft[(i, k)] = m[(i, k)];
            }
        }
    }
    let gamma = &m - &ft;
    (ft, gamma)
}

/// `‖(F̃⁻¹Γ)²‖` for the resolvent splitting of one index set.
pub fn resolvent_contraction(op: &BlockOperator, set: &[Idx], lambda: f64) -> Result<f64> {
    let (ft, gamma) = resolvent_split(op, set, lambda);
    let t = invert(&ft)? * gamma;
    Ok(spectral_norm(&(&t * &t)))
}

/// Inverse by the resolvent expansion `X = F̃⁻¹ - F̃⁻¹Γ X`, iterated until
/// every entry is stationary to `rel_tol` relative to itself. Far entries
/// are then accurate relative to their own size rather than to the largest
/// entry, which a direct factorization cannot give. `None` if it diverges.
pub fn resolvent_inverse(
    op: &BlockOperator,
    set: &[Idx],
    lambda: f64,
    rel_tol: f64,
) -> Result<Option<DMatrix<Complex64>>> {
    let (ft, gamma) = resolvent_split(op, set, lambda);
    let ft_inv = invert(&ft)?;
    let t = &ft_inv * gamma;
    let mut x = ft_inv.clone();
    let max_iter = 20 * set.len() + 100;
    for _ in 0..max_iter {
        let next = &ft_inv - &t * &x;
        let settled = next.iter().zip(x.iter()).all(|(a, b)| {
            let diff = (a - b).norm();
            diff == 0.0 || diff <= rel_tol * a.norm()
        });
        if !next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Ok(None);
        }
        x = next;
        if settled {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub theta: f64,
    /// Integer part `Θ` in `θ = Θ + δθ'`.
    pub big_theta: i64,
    pub theta_prime: f64,
    pub norm: f64,
    pub bad: bool,
    pub excluded: bool,
}

#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub points: Vec<ThetaPoint>,
    pub threshold: f64,
    pub bad_fraction: f64,
    /// Grid measure of the bad set: bad fraction times the scanned length.
    pub bad_measure: f64,
}

/// `‖T(θ)⁻¹‖` over the components of `set` that contain characteristic rows;
/// `θ` is bad if the norm exceeds `δ^{-1-ε}`. Points with
/// `|Θ| > 2|log δ|^{2s} + 1` are excluded.
pub fn theta_spectrum_scan(
    op: &BlockOperator,
    set: &[Idx],
    thetas: &[f64],
    epsilon: f64,
    s: f64,
) -> ThetaScan {
    let delta = op.delta;
    let threshold = delta.powf(-1.0 - epsilon);
    let theta_cap = 2.0 * delta.ln().abs().powf(2.0 * s) + 1.0;
    let comps: Vec<Vec<Idx>> = op
        .components(set)
        .into_iter()
        .filter(|c| c.iter().any(|x| op.is_characteristic(x)))
        .collect();
    let points: Vec<ThetaPoint> = thetas
        .par_iter()
        .map(|&theta| {
            let big = theta.round() as i64;
            let theta_prime = (theta - big as f64) / delta;
            if big.unsigned_abs() as f64 > theta_cap {
                return ThetaPoint {
                    theta,
                    big_theta: big,
                    theta_prime,
                    norm: f64::NAN,
                    bad: false,
                    excluded: true,
                };
            }
            let shifted = op.clone().with_theta(theta);
            let norm = comps
                .iter()
                .map(|c| 1.0 / min_singular_value(&shifted.dense(c, 0.0)))
                .fold(0.0, f64::max);
            ThetaPoint {
                theta,
                big_theta: big,
                theta_prime,
                norm,
                bad: !(norm <= threshold),
                excluded: false,
            }
        })
        .collect();
    let scanned: Vec<&ThetaPoint> = points.iter().filter(|p| !p.excluded).collect();
    let bad = scanned.iter().filter(|p| p.bad).count();
    let bad_fraction = if scanned.is_empty() {
        0.0
    } else {
        bad as f64 / scanned.len() as f64
    };
    let span = match (
        scanned.iter().map(|p| p.theta).reduce(f64::min),
        scanned.iter().map(|p| p.theta).reduce(f64::max),
    ) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    ThetaScan {
        points,
        threshold,
        bad_fraction,
        bad_measure: bad_fraction * span,
    }
}
