//! Sparse Fourier series on the space-time lattice `Z^b x Z^d`.
//!
//! A site `(n, j)` indexes the mode `e^{i n.omega t} e^{i j.x}`. Series are
//! finite maps from sites to complex amplitudes, kept in a `BTreeMap` so that
//! every accumulation runs in lexicographic site order and results are
//! bitwise reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative drop tolerance applied after products.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-14;

/// A lattice point `(n, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex {
    pub n: Vec<i64>,
    pub j: Vec<i64>,
}

impl SiteIndex {
    pub fn new(n: Vec<i64>, j: Vec<i64>) -> Self {
        Self { n, j }
    }

    pub fn zero(b: usize, d: usize) -> Self {
        Self {
            n: vec![0; b],
            j: vec![0; d],
        }
    }

    pub fn b(&self) -> usize {
        self.n.len()
    }

    pub fn d(&self) -> usize {
        self.j.len()
    }

    pub fn is_zero(&self) -> bool {
        self.n.iter().chain(self.j.iter()).all(|&x| x == 0)
    }

    /// `|j|^2`
    pub fn j_sq(&self) -> i64 {
        self.j.iter().map(|x| x * x).sum()
    }

    pub fn n_dot(&self, omega: &[i64]) -> i64 {
        self.n.iter().zip(omega).map(|(a, b)| a * b).sum()
    }

    pub fn n_dot_f(&self, omega: &[f64]) -> f64 {
        self.n.iter().zip(omega).map(|(&a, b)| a as f64 * b).sum()
    }

    /// ℓ¹ norm of the full coordinate vector.
    pub fn l1(&self) -> i64 {
        self.n.iter().chain(self.j.iter()).map(|x| x.abs()).sum()
    }

    /// ℓ∞ norm of the full coordinate vector.
    pub fn linf(&self) -> i64 {
        self.n
            .iter()
            .chain(self.j.iter())
            .map(|x| x.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn j_is_zero(&self) -> bool {
        self.j.iter().all(|&x| x == 0)
    }

    fn check_dims(&self, other: &Self) {
        assert!(
            self.b() == other.b() && self.d() == other.d(),
            "site dimension mismatch"
        );
    }
}

impl Add for &SiteIndex {
    type Output = SiteIndex;
    fn add(self, rhs: &SiteIndex) -> SiteIndex {
        self.check_dims(rhs);
        SiteIndex {
            n: self.n.iter().zip(&rhs.n).map(|(a, b)| a + b).collect(),
            j: self.j.iter().zip(&rhs.j).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SiteIndex {
    type Output = SiteIndex;
    fn sub(self, rhs: &SiteIndex) -> SiteIndex {
        self.check_dims(rhs);
        SiteIndex {
            n: self.n.iter().zip(&rhs.n).map(|(a, b)| a - b).collect(),
            j: self.j.iter().zip(&rhs.j).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &SiteIndex {
    type Output = SiteIndex;
    fn neg(self) -> SiteIndex {
        SiteIndex {
            n: self.n.iter().map(|a| -a).collect(),
            j: self.j.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "(({}),({}))", join(&self.n), join(&self.j))
    }
}

/// Finite map `SiteIndex -> C`, never storing (near-)zero amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSeries {
    b: usize,
    d: usize,
    terms: BTreeMap<SiteIndex, Complex64>,
    drop_tolerance: f64,
}

impl SparseSeries {
    pub fn new(b: usize, d: usize) -> Self {
        Self {
            b,
            d,
            terms: BTreeMap::new(),
            drop_tolerance: DEFAULT_DROP_TOLERANCE,
        }
    }

    /// `amplitude * δ_site`
    pub fn point(site: SiteIndex, amplitude: Complex64) -> Self {
        let mut s = Self::new(site.b(), site.d());
        s.insert(site, amplitude);
        s
    }

    /// `δ_0` with amplitude 1, the unit of convolution.
    pub fn unit(b: usize, d: usize) -> Self {
        Self::point(SiteIndex::zero(b, d), Complex64::new(1.0, 0.0))
    }

    pub fn from_terms<I>(b: usize, d: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (SiteIndex, Complex64)>,
    {
        let mut s = Self::new(b, d);
        for (k, v) in terms {
            s.add_to(k, v);
        }
        s.prune();
        s
    }

    pub fn with_drop_tolerance(mut self, tol: f64) -> Self {
        self.drop_tolerance = tol;
        self.prune();
        self
    }

    pub fn drop_tolerance(&self) -> f64 {
        self.drop_tolerance
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, site: &SiteIndex) -> Complex64 {
        self.terms.get(site).copied().unwrap_or_default()
    }

    pub fn contains(&self, site: &SiteIndex) -> bool {
        self.terms.contains_key(site)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &SiteIndex> {
        self.terms.keys()
    }

    pub fn support_vec(&self) -> Vec<SiteIndex> {
        self.terms.keys().cloned().collect()
    }

    /// Sets an amplitude; exact zeros remove the site.
    pub fn insert(&mut self, site: SiteIndex, amplitude: Complex64) {
        assert!(site.b() == self.b && site.d() == self.d, "site dimension mismatch");
        if amplitude == Complex64::default() {
            self.terms.remove(&site);
        } else {
            self.terms.insert(site, amplitude);
        }
    }

    pub fn remove(&mut self, site: &SiteIndex) -> Option<Complex64> {
        self.terms.remove(site)
    }

    fn add_to(&mut self, site: SiteIndex, amplitude: Complex64) {
        *self.terms.entry(site).or_default() += amplitude;
    }

    pub fn max_modulus(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Removes entries below `drop_tolerance * max modulus`.
    pub fn prune(&mut self) {
        let cutoff = self.drop_tolerance * self.max_modulus();
        self.terms.retain(|_, z| z.norm() > cutoff && *z != Complex64::default());
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::new(self.b, self.d);
        out.drop_tolerance = self.drop_tolerance;
        for (k, v) in &self.terms {
            out.insert(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_to(k.clone(), *v);
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Keeps only the sites accepted by `keep`.
    pub fn restrict<F: Fn(&SiteIndex) -> bool>(&self, keep: F) -> Self {
        let mut out = Self::new(self.b, self.d);
        out.drop_tolerance = self.drop_tolerance;
        for (k, v) in &self.terms {
            if keep(k) {
                out.terms.insert(k.clone(), *v);
            }
        }
        out
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.b != other.b || self.d != other.d {
            return Err(Error::DimensionMismatch {
                b: self.b,
                d: self.d,
                got_b: other.b,
                got_d: other.d,
            });
        }
        Ok(())
    }

    /// Largest pairwise entrywise difference, used by tests and invariants.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (k, v) in &self.terms {
            m = m.max((v - other.get(k)).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                m = m.max(v.norm());
            }
        }
        m
    }
}

/// `(f*g)(s) = Σ f(s') g(s - s')`.
pub fn convolve(f: &SparseSeries, g: &SparseSeries) -> Result<SparseSeries> {
    f.check_compatible(g)?;
    let mut out = SparseSeries::new(f.b, f.d);
    out.drop_tolerance = f.drop_tolerance.max(g.drop_tolerance);
    for (sf, af) in &f.terms {
        for (sg, ag) in &g.terms {
            out.add_to(sf + sg, af * ag);
        }
    }
    out.prune();
    Ok(out)
}

/// `p`-fold convolution power; `f^{*0} = δ_0`.
pub fn conv_power(f: &SparseSeries, p: u32) -> Result<SparseSeries> {
    let mut acc = SparseSeries::unit(f.b, f.d);
    acc.drop_tolerance = f.drop_tolerance;
    for _ in 0..p {
        acc = convolve(&acc, f)?;
    }
    Ok(acc)
}

/// `result(n, j) = conj(f(-n, -j))`.
pub fn conjugate_flip(f: &SparseSeries) -> SparseSeries {
    let mut out = SparseSeries::new(f.b, f.d);
    out.drop_tolerance = f.drop_tolerance;
    for (k, v) in &f.terms {
        out.terms.insert(-k, v.conj());
    }
    out
}

/// One seed mode `a_k e^{i j_k . x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub j: Vec<i64>,
    pub a: f64,
}

/// Problem data: dimension, nonlinearity, coupling and the seed modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub d: usize,
    pub p: u32,
    pub delta: f64,
    pub phase_m: f64,
    pub modes: Vec<Mode>,
}

impl ProblemSpec {
    pub fn new(d: usize, p: u32, delta: f64, modes: Vec<Mode>) -> Result<Self> {
        let spec = Self {
            d,
            p,
            delta,
            phase_m: 0.0,
            modes,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor from parallel lists of modes and amplitudes.
    pub fn from_lists(
        d: usize,
        p: u32,
        delta: f64,
        js: &[Vec<i64>],
        amps: &[f64],
    ) -> Result<Self> {
        if js.len() != amps.len() {
            return Err(Error::InvalidSpec(format!(
                "{} modes but {} amplitudes",
                js.len(),
                amps.len()
            )));
        }
        let modes = js
            .iter()
            .zip(amps)
            .map(|(j, &a)| Mode { j: j.clone(), a })
            .collect();
        Self::new(d, p, delta, modes)
    }

    pub fn with_phase(mut self, m: f64) -> Self {
        self.phase_m = m;
        self
    }

    pub fn b(&self) -> usize {
        self.modes.len()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.a).collect()
    }

    pub fn j_list(&self) -> Vec<Vec<i64>> {
        self.modes.iter().map(|m| m.j.clone()).collect()
    }

    /// Same problem with new amplitudes.
    pub fn with_amplitudes(&self, a: &[f64]) -> Result<Self> {
        assert_eq!(a.len(), self.b());
        let mut out = self.clone();
        for (m, &ak) in out.modes.iter_mut().zip(a) {
            m.a = ak;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        out.delta = delta;
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("dimension d must be >= 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidSpec("need at least one mode (b >= 1)".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidSpec("nonlinearity exponent p must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "delta = {} must lie in (0, 1)",
                self.delta
            )));
        }
        if !self.phase_m.is_finite() {
            return Err(Error::InvalidSpec("phase m must be finite".into()));
        }
        for (k, m) in self.modes.iter().enumerate() {
            if m.j.len() != self.d {
                return Err(Error::InvalidSpec(format!(
                    "mode {k}: j has length {} but d = {}",
                    m.j.len(),
                    self.d
                )));
            }
            if m.j.iter().all(|&x| x == 0) {
                return Err(Error::InvalidSpec(format!(
                    "mode {k}: j_k must be nonzero (j_k != 0 is required for every seed mode)"
                )));
            }
            if !(m.a > 0.0 && m.a <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "mode {k}: amplitude a_k = {} must lie in (0, 1]",
                    m.a
                )));
            }
            if let Some(k2) = self.modes[..k].iter().position(|o| o.j == m.j) {
                return Err(Error::InvalidSpec(format!(
                    "mode {k}: j_k duplicates mode {k2}"
                )));
            }
        }
        Ok(())
    }

    /// Seed site `(-e_k, j_k)`.
    pub fn seed_site(&self, k: usize) -> SiteIndex {
        let mut n = vec![0; self.b()];
        n[k] = -1;
        SiteIndex::new(n, self.modes[k].j.clone())
    }

    pub fn seed_sites(&self) -> Vec<SiteIndex> {
        (0..self.b()).map(|k| self.seed_site(k)).collect()
    }

    /// `omega^(0) = (|j_k|^2)_k`.
    pub fn omega0(&self) -> FrequencyVector {
        FrequencyVector::new(
            self.modes
                .iter()
                .map(|m| m.j.iter().map(|x| x * x).sum::<i64>() as f64)
                .collect(),
        )
    }

    pub fn omega0_int(&self) -> Vec<i64> {
        self.modes
            .iter()
            .map(|m| m.j.iter().map(|x| x * x).sum::<i64>())
            .collect()
    }
}

/// Basic frequency vector `omega ∈ R^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    pub omega: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Self {
        Self { omega }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().all(|w| w.is_finite())
    }

    /// The integer vector if every entry is integral.
    pub fn as_integral(&self) -> Option<Vec<i64>> {
        self.omega
            .iter()
            .map(|&w| (w.fract() == 0.0 && w.is_finite()).then_some(w as i64))
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.omega
                .iter()
                .zip(&other.omega)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn norm(&self) -> f64 {
        self.omega.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// The linear seed `u0 = Σ a_k δ_{(-e_k, j_k)}` and `v0 = conjugate_flip(u0)`.
pub fn linear_solution(spec: &ProblemSpec) -> Result<(SparseSeries, SparseSeries)> {
    spec.validate()?;
    let mut u0 = SparseSeries::new(spec.b(), spec.d);
    for (k, m) in spec.modes.iter().enumerate() {
        u0.insert(spec.seed_site(k), Complex64::new(m.a, 0.0));
    }
    let v0 = conjugate_flip(&u0);
    Ok((u0, v0))
}
