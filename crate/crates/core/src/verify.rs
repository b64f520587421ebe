//! Independent validation of constructed solutions: weighted lattice norms,
//! collocation residual of the PDE, and split-step time evolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{FrequencyVector, ProblemSpec, SiteIndex, SparseSeries};

/// `ρ(x) = exp(β|x|)` for `|x|_1 > x0`, `1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub beta: f64,
    pub x0: f64,
}

impl WeightSpec {
    pub fn new(beta: f64, x0: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) || x0 < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "weight needs 0 <= beta < 1 and x0 >= 0, got beta = {beta}, x0 = {x0}"
            )));
        }
        Ok(Self { beta, x0 })
    }

    /// `β = 0.1` and `x0` the largest seed norm, so seed modes are unweighted.
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        let x0 = spec.seed_sites().iter().map(|s| s.l1()).max().unwrap_or(0) as f64;
        Self { beta: 0.1, x0 }
    }

    pub fn log_weight(&self, l1: i64) -> f64 {
        let r = l1 as f64;
        if r > self.x0 {
            self.beta * r
        } else {
            0.0
        }
    }
}

/// `sqrt(Σ |f(x)|² ρ(x)²)`, accumulated in the log domain.
pub fn weighted_norm(f: &SparseSeries, w: WeightSpec) -> f64 {
    log_weighted_norm(f.iter().map(|(s, c)| (s.l1(), c.norm())), w).exp()
}

/// `log sqrt(Σ |c|² ρ²)` over `(ℓ¹ norm, |c|)` pairs; `-∞` for an empty sum.
pub fn log_weighted_norm(terms: impl Iterator<Item = (i64, f64)>, w: WeightSpec) -> f64 {
    let logs: Vec<f64> = terms
        .filter(|(_, c)| *c > 0.0)
        .map(|(r, c)| 2.0 * (c.ln() + w.log_weight(r)))
        .collect();
    let Some(m) = logs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    0.5 * (m + s.ln())
}


/// Physical field scale `δ^{1/(2p)}`: `U = δ^{1/(2p)} u` solves the unscaled equation.
pub fn physical_scale(spec: &ProblemSpec) -> f64 {
    spec.delta.powf(1.0 / (2.0 * spec.p as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationGrid {
    pub t_points: usize,
    /// Points per spatial dimension on `[0, 2π)`.
    pub x_points: usize,
    /// Times sampled uniformly on `[0, t_span)`.
    pub t_span: f64,
}

impl CollocationGrid {
    pub fn new(t_points: usize, x_points: usize) -> Self {
        Self {
            t_points,
            x_points,
            t_span: 2.0 * PI,
        }
    }

    /// Smallest grid passing the Nyquist checks for `u`, `ω`.
    pub fn minimal(u: &SparseSeries, omega: &[f64]) -> Self {
        let (jmax, wmax) = spectral_extent(u, omega);
        Self::new(
            (2.0 * wmax).ceil() as usize + 1,
            2 * jmax as usize + 1,
        )
    }
}

fn spectral_extent(u: &SparseSeries, omega: &[f64]) -> (i64, f64) {
    let jmax = u
        .support()
        .flat_map(|s| s.j.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(0);
    let wmax = u
        .support()
        .map(|s| s.n_dot_f(omega).abs())
        .fold(0.0, f64::max);
    (jmax, wmax)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    /// Sup and mean of `|i∂ₜU + ΔU − |U|^{2p}U − mU|` for the physical field.
    pub sup: f64,
    pub mean: f64,
    /// `δ^{1/(2p)}`, to compare with lattice residuals of `u`.
    pub scale: f64,
    pub points: usize,
}

/// Collocation residual of the unscaled equation for `U = δ^{1/(2p)} u`,
/// `U(t, x) = Σ û(n, j) e^{i(n·ω t + j·x)}`, with exact term-wise derivatives.
pub fn pde_residual(
    u: &SparseSeries,
    omega: &FrequencyVector,
    spec: &ProblemSpec,
    grid: CollocationGrid,
) -> Result<PdeResidual> {
    let omega = &omega.omega;
    if omega.len() != u.b() || u.d() != spec.d {
        return Err(Error::DimensionMismatch {
            b: spec.b(),
            d: spec.d,
            got_b: omega.len(),
            got_d: u.d(),
        });
    }
    let (jmax, wmax) = spectral_extent(u, omega);
    if grid.x_points < 2 * jmax as usize + 1 {
        return Err(Error::GridTooCoarse(format!(
            "{} x points per dimension, need >= {} for |j| <= {jmax}",
            grid.x_points,
            2 * jmax + 1
        )));
    }
    let t_needed = 2.0 * wmax * grid.t_span / (2.0 * PI);
    if (grid.t_points as f64) < t_needed {
        return Err(Error::GridTooCoarse(format!(
            "{} t points over span {}, need >= {t_needed:.1} for |n·ω| <= {wmax:.3}",
            grid.t_points, grid.t_span
        )));
    }
    let scale = physical_scale(spec);
    let terms: Vec<(Vec<f64>, f64, Complex64, Complex64)> = u
        .iter()
        .map(|(s, c)| {
            let c = c * scale;
            let lin = -(s.n_dot_f(omega) + s.j_sq() as f64 + spec.phase_m);
            (
                s.j.iter().map(|&x| x as f64).collect(),
                s.n_dot_f(omega),
                c,
                c * lin,
            )
        })
        .collect();
    let d = spec.d;
    let nx = grid.x_points.pow(d as u32);
    let total = grid.t_points * nx;
    let p = spec.p as i32;
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let t = grid.t_span * (idx / nx) as f64 / grid.t_points as f64;
            let mut rem = idx % nx;
            let mut x = vec![0.0; d];
            for xi in x.iter_mut() {
                *xi = 2.0 * PI * (rem % grid.x_points) as f64 / grid.x_points as f64;
                rem /= grid.x_points;
            }
            let mut field = Complex64::new(0.0, 0.0);
            let mut linear = Complex64::new(0.0, 0.0);
            for (j, nw, c, l) in &terms {
                let phase = nw * t + j.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                let e = Complex64::from_polar(1.0, phase);
                field += c * e;
                linear += l * e;
            }
            (linear - field * field.norm_sqr().powi(p)).norm()
        })
        .collect();
    let sup = values.iter().copied().fold(0.0, f64::max);
    let mean = values.iter().sum::<f64>() / total.max(1) as f64;
    Ok(PdeResidual {
        sup,
        mean,
        scale,
        points: total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub grid_points: usize,
    /// `max_t max_k ||ψ̂(t, j_k)| − |Û(t, j_k)|| / |Û(t, j_k)|` against the constructed field.
    pub amplitude_drift: f64,
    /// `max_t max_k |arg(ψ̂(t, j_k) / Û(t, j_k))|`.
    pub phase_error: f64,
    /// Fitted slope of the unwrapped phase of `ψ̂(t, j_k) e^{iω⁽⁰⁾_k t}`: the rate at
    /// which the linear reference `e^{−iω⁽⁰⁾_k t}` drifts away.
    pub reference_phase_rate: Vec<f64>,
    /// `|ω_k − ω⁽⁰⁾_k|` of the constructed solution.
    pub frequency_shift: Vec<f64>,
    /// `max_t |‖ψ(t)‖² − ‖ψ(0)‖²| / ‖ψ(0)‖²`.
    pub mass_error: f64,
}

/// FFT along every axis of a row-major `m^d` array.
fn fft_nd(data: &mut [Complex64], m: usize, d: usize, fft: &dyn Fft<f64>, scratch: &mut Vec<Complex64>) {
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    scratch.resize(fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
    let total = data.len();
    for axis in 0..d {
        let stride = m.pow(axis as u32);
        for base in 0..total {
            if (base / stride) % m != 0 {
                continue;
            }
            for (k, l) in line.iter_mut().enumerate() {
                *l = data[base + k * stride];
            }
            fft.process_with_scratch(&mut line, scratch);
            for (k, l) in line.iter().enumerate() {
                data[base + k * stride] = *l;
            }
        }
    }
}

fn wave_index(j: &[i64], m: usize) -> usize {
    j.iter()
        .rev()
        .fold(0, |acc, &x| acc * m + x.rem_euclid(m as i64) as usize)
}

fn grid_size(u: &SparseSeries, p: u32) -> usize {
    let (jmax, _) = spectral_extent(u, &vec![0.0; u.b()]);
    // room for the (2p+1)-fold products without aliasing onto the support
    let need = ((2 * p as i64 + 2) * jmax.max(1) + 1) as usize;
    need.next_power_of_two().max(16)
}

/// Strang split-step integration of `i∂ₜψ = −Δψ + |ψ|^{2p}ψ + mψ` from
/// `ψ(0) = U(0, ·)`, compared against the constructed field `U(t, ·)`.
pub fn evolve_drift(
    u: &SparseSeries,
    omega: &FrequencyVector,
    spec: &ProblemSpec,
    t_final: f64,
    dt: f64,
) -> Result<DriftReport> {
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidSpec(format!("need dt > 0 and T > 0, got {dt}, {t_final}")));
    }
    let d = spec.d;
    let m = grid_size(u, spec.p);
    let n = m.pow(d as u32);
    if n > 1 << 22 {
        return Err(Error::GridTooCoarse(format!("{m}^{d} grid exceeds the evolution budget")));
    }
    let omega = &omega.omega;
    let scale = physical_scale(spec);
    let seeds: Vec<SiteIndex> = spec.seed_sites();
    let seed_waves: Vec<usize> = seeds.iter().map(|s| wave_index(&s.j, m)).collect();
    let omega0 = spec.omega0().omega;

    // constructed Fourier coefficient of U at time t and wave j_k
    let constructed = |t: f64, k: usize| -> Complex64 {
        u.iter()
            .filter(|(s, _)| s.j == seeds[k].j)
            .map(|(s, c)| c * scale * Complex64::from_polar(1.0, s.n_dot_f(omega) * t))
            .sum()
    };

    let mut psi_hat = vec![Complex64::new(0.0, 0.0); n];
    for (s, c) in u.iter() {
        psi_hat[wave_index(&s.j, m)] += c * scale;
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft(m, FftDirection::Forward);
    let inverse = planner.plan_fft(m, FftDirection::Inverse);
    let mut scratch = Vec::new();
    let norm = 1.0 / n as f64;

    // linear propagator e^{−i(|j|² + m)dt} on the FFT ordering
    let half = m as i64 / 2;
    let propagator: Vec<Complex64> = (0..n)
        .map(|idx| {
            let mut rem = idx;
            let mut j2 = 0i64;
            for _ in 0..d {
                let mut k = (rem % m) as i64;
                if k > half {
                    k -= m as i64;
                }
                j2 += k * k;
                rem /= m;
            }
            Complex64::from_polar(1.0, -(j2 as f64 + spec.phase_m) * dt)
        })
        .collect();

    let mut psi = psi_hat.clone();
    fft_nd(&mut psi, m, d, inverse.as_ref(), &mut scratch);
    let mass0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let peak = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (jmax, _) = spectral_extent(u, omega);
    let top_rate = (jmax * jmax * d as i64) as f64 + spec.phase_m.abs() + peak.powi(2 * spec.p as i32);
    // occupied modes turning by more than π per step defeat the splitting
    if top_rate * dt > PI {
        return Err(Error::Unstable {
            suggested_dt: 0.5 * PI / top_rate,
        });
    }

    let steps = (t_final / dt).round() as usize;
    let samples = 2000.min(steps).max(1);
    let every = (steps / samples).max(1);
    let b = seeds.len();
    let mut amplitude_drift: f64 = 0.0;
    let mut phase_error: f64 = 0.0;
    let mut mass_error: f64 = 0.0;
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); b];
    let mut last_phase = vec![0.0; b];
    let p = spec.p as i32;
    let nonlinear = |psi: &mut [Complex64], tau: f64| {
        for z in psi.iter_mut() {
            *z *= Complex64::from_polar(1.0, -z.norm_sqr().powi(p) * tau);
        }
    };

    let mut record = |t: f64, psi_hat: &[Complex64], mass_error: &mut f64, mass: f64| -> Result<()> {
        if !mass.is_finite() {
            return Err(Error::Unstable { suggested_dt: dt / 4.0 });
        }
        *mass_error = mass_error.max((mass - mass0).abs() / mass0);
        for k in 0..b {
            let got = psi_hat[seed_waves[k]];
            let want = constructed(t, k);
            amplitude_drift = amplitude_drift.max((got.norm() - want.norm()).abs() / want.norm());
            phase_error = phase_error.max((got / want).arg().abs());
            let raw = (got * Complex64::from_polar(1.0, omega0[k] * t)).arg();
            let mut ph = raw;
            if let Some(&(_, prev)) = series[k].last() {
                ph = prev + (raw - last_phase[k] + PI).rem_euclid(2.0 * PI) - PI;
            }
            last_phase[k] = raw;
            series[k].push((t, ph));
        }
        Ok(())
    };

    record(0.0, &psi_hat, &mut mass_error, mass0)?;
    for step in 1..=steps {
        nonlinear(&mut psi, 0.5 * dt);
        fft_nd(&mut psi, m, d, forward.as_ref(), &mut scratch);
        for (z, e) in psi.iter_mut().zip(&propagator) {
            *z *= e * norm;
        }
        fft_nd(&mut psi, m, d, inverse.as_ref(), &mut scratch);
        nonlinear(&mut psi, 0.5 * dt);
        if step % every == 0 || step == steps {
            let mass: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            psi_hat.copy_from_slice(&psi);
            fft_nd(&mut psi_hat, m, d, forward.as_ref(), &mut scratch);
            psi_hat.iter_mut().for_each(|z| *z *= norm);
            record(step as f64 * dt, &psi_hat, &mut mass_error, mass)?;
        }
    }

    let reference_phase_rate = series.iter().map(|s| fit_slope(s).abs()).collect();
    let frequency_shift = omega.iter().zip(&omega0).map(|(a, b)| (a - b).abs()).collect();
    Ok(DriftReport {
        t_final: steps as f64 * dt,
        dt,
        steps,
        grid_points: n,
        amplitude_drift,
        phase_error,
        reference_phase_rate,
        frequency_shift,
        mass_error,
    })
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
