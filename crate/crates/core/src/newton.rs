//! The Lyapunov–Schmidt iteration: Newton steps on the P-equations (off the
//! seed support `S`), exact solves of the Q-equations (on `S`) for the
//! frequencies, amplitude–frequency modulation, Diophantine checks, and
//! excision sweeps.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristics::SiteBox;
use crate::conditions::{check_condition_i, check_condition_ii, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::lattice::{
    conjugate_flip, conv_power, convolve, linear_solution, FrequencyVector, ProblemSpec,
    SiteIndex, SparseSeries,
};
use crate::linop::{block_decompose, BlockDecomposition, BlockOperator, Idx, DEFAULT_BLOCK_LIMIT};
use crate::verify::{weighted_norm, WeightSpec};

/// Amplitudes below this are refused rather than silently dropped.
pub const MIN_AMPLITUDE: f64 = 1e-6;
/// Drop tolerance of Newton iterates, relative to the largest amplitude.
pub const ITERATE_DROP_TOLERANCE: f64 = 1e-22;
const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Weighted residual at which the iteration stops.
    pub tol: f64,
    /// Newton steps, the first one included.
    pub max_iter: usize,
    /// Exponent `s` of the truncation `N = ⌈|log δ|^s⌉`.
    pub second_step_s: f64,
    /// Explicit truncation box overriding `N`.
    pub sbox: Option<SiteBox>,
    /// First step: excise if some `|det Γ_k| / δ^size < ε`.
    pub excision_epsilon: f64,
    /// Second step: excise if some block has `min |eig| < δ^{1+ε}`.
    pub second_step_epsilon: f64,
    pub kappa: f64,
    /// Diophantine exponent; `None` means `2b + 2`.
    pub gamma: Option<f64>,
    pub diophantine_radius: i64,
    pub check_conditions: bool,
    pub max_depth: usize,
    pub block_limit: usize,
    pub weight: Option<WeightSpec>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 12,
            second_step_s: 2.0,
            sbox: None,
            excision_epsilon: 1e-3,
            second_step_epsilon: 0.1,
            kappa: 1e-2,
            gamma: None,
            diophantine_radius: 20,
            check_conditions: true,
            max_depth: DEFAULT_MAX_DEPTH,
            block_limit: DEFAULT_BLOCK_LIMIT,
            weight: None,
        }
    }
}

impl SolveOptions {
    /// Cube `|(n, j)|_∞ <= ⌈|log δ|^s⌉`, or the explicit box.
    pub fn truncation(&self, delta: f64) -> SiteBox {
        self.sbox.unwrap_or_else(|| {
            let n = delta.ln().abs().powf(self.second_step_s).ceil().max(1.0) as i64;
            SiteBox::cube(n)
        })
    }

    pub fn gamma_for(&self, b: usize) -> f64 {
        self.gamma.unwrap_or(2.0 * b as f64 + 2.0)
    }

    pub fn weight_for(&self, spec: &ProblemSpec) -> WeightSpec {
        self.weight.unwrap_or_else(|| WeightSpec::for_spec(spec))
    }
}

#[derive(Debug, Clone)]
pub struct IterationState {
    pub u: SparseSeries,
    pub v: SparseSeries,
    pub omega: FrequencyVector,
    pub residual: f64,
    pub weighted_residual: f64,
    /// `‖u_m - u_{m-1}‖_2` of the step that produced this state.
    pub step_norm: f64,
    pub step_index: usize,
}

/// `F = (F_U, F_V)` on the whole support (no truncation).
pub fn residual_series(
    u: &SparseSeries,
    v: &SparseSeries,
    omega: &[f64],
    spec: &ProblemSpec,
) -> Result<(SparseSeries, SparseSeries)> {
    let w = conv_power(&convolve(u, v)?, spec.p)?;
    let mut fu = convolve(&w, u)?.scale(Complex64::new(spec.delta, 0.0));
    let mut fv = convolve(&w, v)?.scale(Complex64::new(spec.delta, 0.0));
    for (s, c) in u.iter() {
        let d = s.n_dot_f(omega) + s.j_sq() as f64 + spec.phase_m;
        fu.insert(s.clone(), fu.get(s) + c * d);
    }
    for (s, c) in v.iter() {
        let d = -s.n_dot_f(omega) + s.j_sq() as f64 + spec.phase_m;
        fv.insert(s.clone(), fv.get(s) + c * d);
    }
    Ok((fu, fv))
}

fn norms(fu: &SparseSeries, fv: &SparseSeries, w: WeightSpec) -> (f64, f64) {
    let plain = (fu.l2_norm().powi(2) + fv.l2_norm().powi(2)).sqrt();
    let weighted = (weighted_norm(fu, w).powi(2) + weighted_norm(fv, w).powi(2)).sqrt();
    (plain, weighted)
}

fn check_amplitudes(spec: &ProblemSpec) -> Result<()> {
    for (k, m) in spec.modes.iter().enumerate() {
        if m.a < MIN_AMPLITUDE {
            return Err(Error::DegenerateAmplitude {
                k,
                value: m.a,
                reason: "effectively fewer frequencies; drop the mode instead".into(),
            });
        }
    }
    Ok(())
}

/// `ω_k = j_k² + m + (δ/a_k) [(u*v)^{*p}*u](-e_k, j_k)`, the Q-equations.
pub fn q_solve(u: &SparseSeries, v: &SparseSeries, spec: &ProblemSpec) -> Result<FrequencyVector> {
    check_amplitudes(spec)?;
    let w = conv_power(&convolve(u, v)?, spec.p)?;
    let mut omega = Vec::with_capacity(spec.b());
    for (k, m) in spec.modes.iter().enumerate() {
        let s = spec.seed_site(k);
        // [w*u](s) evaluated directly
        let mut acc = Complex64::new(0.0, 0.0);
        for (g, c) in w.iter() {
            acc += c * u.get(&(&s - g));
        }
        let val = acc * (spec.delta / m.a);
        if val.im.abs() > REALITY_TOL {
            return Err(Error::NonRealFrequency { k, imag: val.im });
        }
        let j2 = m.j.iter().map(|x| x * x).sum::<i64>() as f64;
        omega.push(j2 + spec.phase_m + val.re);
    }
    Ok(FrequencyVector::new(omega))
}

/// `U` at the seeds and `V` at their reflections: the Q-equation rows.
pub fn seed_indices(spec: &ProblemSpec) -> Vec<Idx> {
    spec.seed_sites()
        .into_iter()
        .flat_map(|s| [Idx::v(-&s), Idx::u(s)])
        .collect()
}

/// Indices reachable from the seeds inside the box: the charge class that
/// carries the solution.
pub fn solve_set(op: &BlockOperator, spec: &ProblemSpec, limit: usize) -> Result<Vec<Idx>> {
    op.reachable(&seed_indices(spec), &HashSet::new(), limit)
}

fn state_from(
    u: SparseSeries,
    omega: FrequencyVector,
    spec: &ProblemSpec,
    weight: WeightSpec,
    step_norm: f64,
    step_index: usize,
) -> Result<IterationState> {
    let v = conjugate_flip(&u);
    let (fu, fv) = residual_series(&u, &v, &omega.omega, spec)?;
    let (residual, weighted_residual) = norms(&fu, &fv, weight);
    Ok(IterationState {
        u,
        v,
        omega,
        residual,
        weighted_residual,
        step_norm,
        step_index,
    })
}

/// One P-step at the current frequency, then the Q-solve.
///
/// Solves `F'_{PP} Δ = F_P` on the solve set minus `S`, sets
/// `u ← u - Δ_U`, `v = conjugate_flip(u)`, `ω ← q_solve(u)`.
pub fn newton_step(
    state: &IterationState,
    spec: &ProblemSpec,
    sbox: SiteBox,
    weight: WeightSpec,
    block_limit: usize,
) -> Result<IterationState> {
    let op = BlockOperator::assemble(&state.u, &state.v, &state.omega.omega, spec, sbox)?;
    let seeds: HashSet<Idx> = seed_indices(spec).into_iter().collect();
    let unknown: Vec<Idx> = solve_set(&op, spec, block_limit)?
        .into_iter()
        .filter(|x| !seeds.contains(x))
        .collect();
    let (fu, fv) = residual_series(&state.u, &state.v, &state.omega.omega, spec)?;
    let mut u_next = state.u.clone();
    let mut step_norm = 0.0;
    if !unknown.is_empty() {
        let m = op.dense(&unknown, 0.0);
        let rhs = DVector::from_iterator(
            unknown.len(),
            unknown.iter().map(|x| match x.comp {
                crate::symbols::Comp::U => fu.get(&x.site),
                crate::symbols::Comp::V => fv.get(&x.site),
            }),
        );
        let delta = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular { size: unknown.len() })?;
        for (x, d) in unknown.iter().zip(delta.iter()) {
            if x.comp == crate::symbols::Comp::U {
                u_next.insert(x.site.clone(), u_next.get(&x.site) - d);
                step_norm += d.norm_sqr();
            }
        }
        step_norm = step_norm.sqrt();
    }
    u_next.prune();
    let v_next = conjugate_flip(&u_next);
    let omega = q_solve(&u_next, &v_next, spec)?;
    let next = state_from(u_next, omega, spec, weight, step_norm, state.step_index + 1)?;
    if next.residual > state.residual && state.residual > 1e-13 {
        return Err(Error::StepRejected {
            before: state.residual,
            after: next.residual,
        });
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineReport {
    pub pass: bool,
    pub worst_n: Vec<i64>,
    /// `‖n.ω‖_T` at the worst `n`.
    pub worst_distance: f64,
    /// `min ‖n.ω‖_T |n|^γ / (κδ)`; the check passes iff this is `>= 1`.
    pub margin: f64,
    /// `min ‖n.ω‖_T |n|^γ / δ`, the largest admissible `κ` on the scan.
    pub kappa_hat: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_radius: i64,
}

pub fn torus_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Exhaustive scan of `‖n.ω‖_T >= κδ/|n|^γ` over `0 < |n|_∞ <= n_radius`, `|n| = |n|_1`.
pub fn diophantine_check(
    omega: &[f64],
    kappa: f64,
    gamma: f64,
    n_radius: i64,
    delta: f64,
) -> DiophantineReport {
    let b = omega.len();
    let per_axis = 2 * n_radius + 1;
    let total = (per_axis as u64).saturating_pow(b as u32);
    let (worst, margin_raw) = (0..total)
        .into_par_iter()
        .filter_map(|code| {
            let mut c = code;
            let mut n = vec![0i64; b];
            for x in n.iter_mut().rev() {
                *x = (c % per_axis as u64) as i64 - n_radius;
                c /= per_axis as u64;
            }
            if n.iter().all(|&x| x == 0) {
                return None;
            }
            let dot: f64 = n.iter().zip(omega).map(|(a, w)| *a as f64 * w).sum();
            let l1: i64 = n.iter().map(|x| x.abs()).sum();
            let v = torus_distance(dot) * (l1 as f64).powf(gamma);
            Some((n, v))
        })
        .reduce_with(|a, b| {
            if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .unwrap_or((vec![0; b], f64::INFINITY));
    let dot: f64 = worst.iter().zip(omega).map(|(a, w)| *a as f64 * w).sum();
    let kappa_hat = margin_raw / delta;
    let margin = kappa_hat / kappa;
    DiophantineReport {
        pass: margin >= 1.0,
        worst_distance: torus_distance(dot),
        worst_n: worst,
        margin,
        kappa_hat,
        kappa,
        gamma,
        n_radius,
    }
}

/// `∂ω/∂a` of the first Q-solve at `u⁽⁰⁾(a)`, by the product rule on the
/// convolution power.
pub fn modulation_jacobian(spec: &ProblemSpec) -> Result<DMatrix<f64>> {
    check_amplitudes(spec)?;
    let (u, v) = linear_solution(spec)?;
    let b = spec.b();
    let p = spec.p;
    let uv = convolve(&u, &v)?;
    let w = conv_power(&uv, p)?;
    let w_prev = conv_power(&uv, p - 1)?;
    let wu = convolve(&w, &u)?;
    let mut jac = DMatrix::zeros(b, b);
    let one = Complex64::new(1.0, 0.0);
    for i in 0..b {
        let si = spec.seed_site(i);
        let du = SparseSeries::point(si.clone(), one);
        let dv = SparseSeries::point(-&si, one);
        // ∂[(uv)^p u] = p (uv)^{p-1} (∂u v + u ∂v) u + (uv)^p ∂u
        let duv = convolve(&du, &v)?.add(&convolve(&u, &dv)?)?;
        let dn = convolve(&convolve(&w_prev, &duv)?, &u)?
            .scale(Complex64::new(p as f64, 0.0))
            .add(&convolve(&w, &du)?)?;
        for k in 0..b {
            let sk = spec.seed_site(k);
            let ak = spec.modes[k].a;
            let mut d = dn.get(&sk).re / ak;
            if i == k {
                d -= wu.get(&sk).re / (ak * ak);
            }
            jac[(k, i)] = spec.delta * d;
        }
    }
    Ok(jac)
}

/// Central differences of `a ↦ q_solve(u⁽⁰⁾(a))`.
pub fn modulation_jacobian_fd(spec: &ProblemSpec, h: f64) -> Result<DMatrix<f64>> {
    let b = spec.b();
    let a = spec.amplitudes();
    let mut jac = DMatrix::zeros(b, b);
    let eval = |a: &[f64]| -> Result<Vec<f64>> {
        let s = spec.with_amplitudes(a)?;
        let (u, v) = linear_solution(&s)?;
        Ok(q_solve(&u, &v, &s)?.omega)
    };
    for i in 0..b {
        let step = h * a[i];
        let mut ap = a.clone();
        let mut am = a.clone();
        ap[i] += step;
        am[i] -= step;
        if ap[i] > 1.0 {
            ap[i] = 1.0;
        }
        let (wp, wm) = (eval(&ap)?, eval(&am)?);
        for k in 0..b {
            jac[(k, i)] = (wp[k] - wm[k]) / (ap[i] - am[i]);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone)]
pub struct ModulationReport {
    pub omega0: FrequencyVector,
    pub omega1: FrequencyVector,
    pub delta_omega: FrequencyVector,
    pub jacobian: DMatrix<f64>,
    pub jacobian_fd_rel_error: f64,
    pub jac_det: f64,
    pub diophantine: DiophantineReport,
    /// Smallest `|det Γ_k| / δ^size` over the first-step blocks.
    pub min_normalized_det: f64,
    pub first_step_blocks: usize,
    /// `‖u⁽¹⁾ - u⁽⁰⁾‖_2`.
    pub delta_u_norm: f64,
    /// `‖F(u⁽⁰⁾, v⁽⁰⁾)‖` at `ω⁽⁰⁾` and `‖F(u⁽¹⁾, v⁽¹⁾)‖` after the step.
    pub initial_residual: f64,
    pub post_step_residual: f64,
}

fn first_step_excision(
    spec: &ProblemSpec,
    sbox: SiteBox,
    eps: f64,
    limit: usize,
) -> Result<(BlockDecomposition, f64)> {
    let (u0, v0) = linear_solution(spec)?;
    let op = BlockOperator::assemble(&u0, &v0, &spec.omega0().omega, spec, sbox)?;
    let set = solve_set(&op, spec, limit)?;
    let dec = block_decompose(&op, &set);
    let (k, val) = dec.weakest(spec.delta).unwrap_or((0, f64::INFINITY));
    if val < eps {
        return Err(Error::Excised {
            block: k,
            size: dec.blocks[k].size(),
            value: val,
            threshold: eps,
        });
    }
    Ok((dec, val))
}

/// Smallest normalized first-step determinant on the solve set (no refusal).
pub fn min_first_step_det(spec: &ProblemSpec, sbox: SiteBox, limit: usize) -> Result<f64> {
    let (u0, v0) = linear_solution(spec)?;
    let op = BlockOperator::assemble(&u0, &v0, &spec.omega0().omega, spec, sbox)?;
    let set = solve_set(&op, spec, limit)?;
    Ok(block_decompose(&op, &set)
        .weakest(spec.delta)
        .map(|x| x.1)
        .unwrap_or(f64::INFINITY))
}

/// Box and factor search radius used for the non-spiral check before solving.
pub fn condition_ii_box(spec: &ProblemSpec) -> (SiteBox, i64) {
    let jmax = spec
        .modes
        .iter()
        .flat_map(|m| m.j.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(1);
    let j_radius = 2 * jmax + 2;
    let sbox = SiteBox::from_j_radius(j_radius).within_budget(spec.b(), spec.d, 200_000);
    (sbox, 10 * j_radius)
}

fn require_conditions(spec: &ProblemSpec, opts: &SolveOptions) -> Result<()> {
    let ci = check_condition_i(spec)?;
    if !ci.passed() {
        let w: Vec<String> = ci.witnesses.iter().map(|w| w.to_string()).collect();
        return Err(Error::ConditionFailed(format!(
            "non-intersection fails: {}",
            w.join("; ")
        )));
    }
    let (sbox, radius) = condition_ii_box(spec);
    let cii = check_condition_ii(spec, opts.max_depth, sbox, radius)?;
    if !cii.passed() {
        let w: Vec<String> = cii.witnesses.iter().map(|w| w.to_string()).collect();
        return Err(Error::ConditionFailed(format!(
            "non-spiral verdict {}: {}",
            cii.verdict,
            w.join("; ")
        )));
    }
    Ok(())
}

/// Q-solve at `u⁽⁰⁾` (the modulation `ω⁽¹⁾`), then one P-step at `ω⁽¹⁾`.
pub fn first_iteration(
    spec: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<(IterationState, ModulationReport)> {
    check_amplitudes(spec)?;
    if opts.check_conditions {
        require_conditions(spec, opts)?;
    }
    let sbox = opts.truncation(spec.delta);
    let weight = opts.weight_for(spec);
    let (dec, min_det) = first_step_excision(spec, sbox, opts.excision_epsilon, opts.block_limit)?;
    let (u0, v0) = linear_solution(spec)?;
    let u0 = u0.with_drop_tolerance(ITERATE_DROP_TOLERANCE);
    let omega0 = spec.omega0();
    let initial = state_from(u0.clone(), omega0.clone(), spec, weight, 0.0, 0)?;
    let omega1 = q_solve(&u0, &v0, spec)?;
    let modulated = state_from(u0.clone(), omega1.clone(), spec, weight, 0.0, 0)?;
    let state = newton_step(&modulated, spec, sbox, weight, opts.block_limit)?;

    let jacobian = modulation_jacobian(spec)?;
    let fd = modulation_jacobian_fd(spec, 1e-5)?;
    let jacobian_fd_rel_error = (&jacobian - &fd).norm() / jacobian.norm();
    let jac_det = jacobian.determinant();
    let diophantine = diophantine_check(
        &omega1.omega,
        opts.kappa,
        opts.gamma_for(spec.b()),
        opts.diophantine_radius,
        spec.delta,
    );
    let report = ModulationReport {
        delta_omega: omega1.sub(&omega0),
        omega0,
        omega1,
        jacobian,
        jacobian_fd_rel_error,
        jac_det,
        diophantine,
        min_normalized_det: min_det,
        first_step_blocks: dec.blocks.len(),
        delta_u_norm: state.u.sub(&u0)?.l2_norm(),
        initial_residual: initial.residual,
        post_step_residual: state.residual,
    };
    Ok((state, report))
}

/// Blocks `Γ_k = diag(±n.Δω) + δA_k` on the characteristic rows off `S`.
#[derive(Debug, Clone)]
pub struct SecondStepCertificate {
    pub sbox: SiteBox,
    pub blocks: usize,
    pub max_block_size: usize,
    pub min_abs_eigenvalue: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn second_step_certificate(
    state: &IterationState,
    spec: &ProblemSpec,
    sbox: SiteBox,
    epsilon: f64,
    limit: usize,
) -> Result<SecondStepCertificate> {
    let op = BlockOperator::assemble(&state.u, &state.v, &state.omega.omega, spec, sbox)?;
    let seeds: HashSet<Idx> = seed_indices(spec).into_iter().collect();
    let set: Vec<Idx> = solve_set(&op, spec, limit)?
        .into_iter()
        .filter(|x| !seeds.contains(x))
        .collect();
    let dec = block_decompose(&op, &set);
    let min_eig = dec
        .blocks
        .iter()
        .map(|b| b.min_abs_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let threshold = spec.delta.powf(1.0 + epsilon);
    Ok(SecondStepCertificate {
        sbox,
        blocks: dec.blocks.len(),
        max_block_size: dec.max_block_size(),
        min_abs_eigenvalue: min_eig,
        threshold,
        passed: min_eig >= threshold,
    })
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: IterationState,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub weighted_history: Vec<f64>,
    /// `r_{m+1} / r_m²` for consecutive weighted residuals.
    pub quadratic_ratios: Vec<f64>,
    pub modulation: ModulationReport,
    pub second_step: SecondStepCertificate,
    pub sbox: SiteBox,
    /// Physical amplitudes `δ^{1/(2p)} a_k`.
    pub physical_amplitudes: Vec<f64>,
    /// `ω_k - |j_k|² - m`.
    pub frequency_shift: Vec<f64>,
    /// Largest `|u(x)|`, `|v(x)|` on characteristic rows outside `S`.
    pub off_support_characteristic_mass: f64,
}

fn characteristic_mass_off_support(state: &IterationState, spec: &ProblemSpec) -> f64 {
    let w = spec.omega0_int();
    let seeds: HashSet<SiteIndex> = spec.seed_sites().into_iter().collect();
    let mut worst: f64 = 0.0;
    for (s, c) in state.u.iter() {
        if !seeds.contains(s) && s.n_dot(&w) + s.j_sq() == 0 {
            worst = worst.max(c.norm());
        }
    }
    for (s, c) in state.v.iter() {
        if !seeds.contains(&-s) && -s.n_dot(&w) + s.j_sq() == 0 {
            worst = worst.max(c.norm());
        }
    }
    worst
}

pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveReport> {
    let sbox = opts.truncation(spec.delta);
    let weight = opts.weight_for(spec);
    let (mut state, modulation) = first_iteration(spec, opts)?;
    let second_step = second_step_certificate(
        &state,
        spec,
        sbox,
        opts.second_step_epsilon,
        opts.block_limit,
    )?;
    if !second_step.passed {
        return Err(Error::Excised {
            block: 0,
            size: second_step.max_block_size,
            value: second_step.min_abs_eigenvalue,
            threshold: second_step.threshold,
        });
    }
    let mut residual_history = vec![state.residual];
    let mut weighted_history = vec![state.weighted_residual];
    let mut iterations = 1;
    while state.weighted_residual >= opts.tol && iterations < opts.max_iter {
        state = newton_step(&state, spec, sbox, weight, opts.block_limit)?;
        residual_history.push(state.residual);
        weighted_history.push(state.weighted_residual);
        iterations += 1;
    }
    let converged = state.weighted_residual < opts.tol;
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            residual: state.weighted_residual,
            history: weighted_history,
        });
    }
    let quadratic_ratios = weighted_history
        .windows(2)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    let scale = spec.delta.powf(1.0 / (2.0 * spec.p as f64));
    let frequency_shift = spec
        .modes
        .iter()
        .zip(&state.omega.omega)
        .map(|(m, w)| w - m.j.iter().map(|x| x * x).sum::<i64>() as f64 - spec.phase_m)
        .collect();
    Ok(SolveReport {
        off_support_characteristic_mass: characteristic_mass_off_support(&state, spec),
        physical_amplitudes: spec.modes.iter().map(|m| scale * m.a).collect(),
        frequency_shift,
        state,
        converged,
        iterations,
        residual_history,
        weighted_history,
        quadratic_ratios,
        modulation,
        second_step,
        sbox,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub excised: usize,
    pub samples: usize,
    pub fraction: f64,
    /// Binomial standard error of `fraction`.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSample {
    pub a: Vec<f64>,
    pub min_normalized_det: f64,
    pub diophantine_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub samples: Vec<SweepSample>,
    pub seed: u64,
}

/// Samples `a` uniformly in `(0, 1]^b`, records the smallest normalized
/// first-step block determinant and the Diophantine margin of `ω⁽¹⁾(a)`, and
/// tabulates the excised fraction per `ε`.
pub fn excision_sweep(
    template: &ProblemSpec,
    epsilons: &[f64],
    n_samples: usize,
    seed: u64,
    sbox: SiteBox,
    opts: &SolveOptions,
) -> Result<SweepTable> {
    if n_samples < 100 {
        return Err(Error::InvalidSpec("an excision sweep needs n_samples >= 100".into()));
    }
    let b = template.b();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| (0..b).map(|_| 1.0 - rng.random::<f64>()).collect())
        .collect();
    let gamma = opts.gamma_for(b);
    let samples: Vec<SweepSample> = draws
        .into_par_iter()
        .map(|a| -> Result<SweepSample> {
            let spec = template.with_amplitudes(&a)?;
            let (u0, v0) = linear_solution(&spec)?;
            let min_normalized_det = min_first_step_det(&spec, sbox, opts.block_limit)?;
            let omega1 = q_solve(&u0, &v0, &spec)?;
            let dio = diophantine_check(
                &omega1.omega,
                opts.kappa,
                gamma,
                opts.diophantine_radius,
                spec.delta,
            );
            Ok(SweepSample {
                a,
                min_normalized_det,
                diophantine_margin: dio.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let excised = samples
                .iter()
                .filter(|s| s.min_normalized_det < eps)
                .count();
            let f = excised as f64 / n_samples as f64;
            SweepRow {
                epsilon: eps,
                excised,
                samples: n_samples,
                fraction: f,
                sigma: (f * (1.0 - f) / n_samples as f64).sqrt(),
            }
        })
        .collect();
    Ok(SweepTable {
        rows,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_wave(a: f64, delta: f64) -> ProblemSpec {
        ProblemSpec::from_lists(1, 1, delta, &[vec![2]], &[a]).unwrap()
    }

    fn two_mode(a1: f64, a2: f64, delta: f64) -> ProblemSpec {
        ProblemSpec::from_lists(1, 1, delta, &[vec![1], vec![2]], &[a1, a2]).unwrap()
    }

    #[test]
    fn q_solve_closed_forms() {
        let (a, delta) = (0.7, 1e-3);
        let spec = plane_wave(a, delta);
        let (u, v) = linear_solution(&spec).unwrap();
        let w = q_solve(&u, &v, &spec).unwrap();
        assert!((w.omega[0] - (4.0 + delta * a * a)).abs() < 1e-15);

        let (a1, a2) = (0.6, 0.8);
        let spec = two_mode(a1, a2, delta);
        let (u, v) = linear_solution(&spec).unwrap();
        let w = q_solve(&u, &v, &spec).unwrap();
        let e1 = 1.0 + delta * (a1 * a1 + 2.0 * a2 * a2);
        let e2 = 4.0 + delta * (2.0 * a1 * a1 + a2 * a2);
        assert!((w.omega[0] - e1).abs() < 1e-14 && (w.omega[1] - e2).abs() < 1e-14);
    }

    #[test]
    fn q_solve_small_amplitude_limit() {
        let spec = two_mode(1e-5, 1e-5, 1e-3);
        let (u, v) = linear_solution(&spec).unwrap();
        let w = q_solve(&u, &v, &spec).unwrap();
        assert!(w.sub(&spec.omega0()).norm() < 1e-12);
        let bad = two_mode(1e-7, 0.5, 1e-3);
        let (u, v) = linear_solution(&bad).unwrap();
        assert!(matches!(
            q_solve(&u, &v, &bad),
            Err(Error::DegenerateAmplitude { k: 0, .. })
        ));
    }

    #[test]
    fn jacobian_closed_form_and_fd() {
        let (a1, a2, delta) = (0.6, 0.8, 1e-3);
        let spec = two_mode(a1, a2, delta);
        let jac = modulation_jacobian(&spec).unwrap();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[2.0 * a1, 4.0 * a2, 4.0 * a1, 2.0 * a2],
        ) * delta;
        assert!((&jac - &expect).norm() < 1e-15);
        let det = jac.determinant();
        let want = -12.0 * delta * delta * a1 * a2;
        assert!(((det - want) / want).abs() < 1e-8);
        let fd = modulation_jacobian_fd(&spec, 1e-5).unwrap();
        assert!((&jac - &fd).norm() / jac.norm() < 1e-6);

        for p in 1..=3 {
            let spec = ProblemSpec::from_lists(1, p, 1e-2, &[vec![1], vec![3]], &[0.4, 0.9]).unwrap();
            let jac = modulation_jacobian(&spec).unwrap();
            let fd = modulation_jacobian_fd(&spec, 1e-5).unwrap();
            assert!((&jac - &fd).norm() / jac.norm() < 1e-6, "p = {p}");
        }
    }

    #[test]
    fn diophantine_examples() {
        let r = diophantine_check(&[1.0, 4.0], 1e-2, 6.0, 5, 1e-3);
        assert!(!r.pass);
        assert_eq!(r.worst_distance, 0.0);

        let (a1, a2, delta) = (0.6, 0.8, 1e-3);
        let w1 = [
            1.0 + delta * (a1 * a1 + 2.0 * a2 * a2),
            4.0 + delta * (2.0 * a1 * a1 + a2 * a2),
        ];
        let dot = 4.0 * w1[0] - w1[1];
        let expect = delta * (2.0 * a1 * a1 + 7.0 * a2 * a2);
        assert!((torus_distance(dot) - expect).abs() < 1e-10);
        let r = diophantine_check(&w1, 1e-2, 6.0, 20, delta);
        assert!(r.pass, "{r:?}");
        assert!(r.kappa_hat >= 1e-2);
    }

    #[test]
    fn plane_wave_converges_in_one_step() {
        let (a, delta) = (0.7, 1e-3);
        let spec = plane_wave(a, delta);
        let report = solve(&spec, &SolveOptions::default()).unwrap();
        assert_eq!(report.iterations, 1);
        assert!(report.state.residual < 1e-12);
        assert!((report.state.omega.omega[0] - (4.0 + delta * a * a)).abs() < 1e-12);
        assert_eq!(report.modulation.delta_u_norm, 0.0);
    }

    #[test]
    fn anchoring_and_reality() {
        let spec = two_mode(0.6, 0.8, 1e-2);
        let opts = SolveOptions {
            sbox: Some(SiteBox::cube(12)),
            ..SolveOptions::default()
        };
        let report = solve(&spec, &opts).unwrap();
        for (k, m) in spec.modes.iter().enumerate() {
            assert_eq!(report.state.u.get(&spec.seed_site(k)), Complex64::new(m.a, 0.0));
        }
        assert_eq!(report.state.v, conjugate_flip(&report.state.u));
    }

    #[test]
    fn sweep_is_reproducible() {
        let spec = plane_wave(0.5, 1e-3);
        let opts = SolveOptions::default();
        let sbox = SiteBox::new(4, 4);
        let a = excision_sweep(&spec, &[1e-1, 1e-3], 200, 11, sbox, &opts).unwrap();
        let b = excision_sweep(&spec, &[1e-1, 1e-3], 200, 11, sbox, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.rows[0].fraction >= a.rows[1].fraction);
        let zero = excision_sweep(&spec, &[0.0], 100, 3, sbox, &opts).unwrap();
        assert_eq!(zero.rows[0].excised, 0);
        assert!(excision_sweep(&spec, &[0.1], 10, 3, sbox, &opts).is_err());
    }
}
