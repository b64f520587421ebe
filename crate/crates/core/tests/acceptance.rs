//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlsqp_core::characteristics::SiteBox;
use nlsqp_core::conditions::{
    check_condition_i, check_condition_ii, symbol_supports, rank_check_momenta, verify_walk,
    walk_check, RankVerdict, Verdict, Witness,
};
use nlsqp_core::lattice::{conv_power, convolve, linear_solution};
use nlsqp_core::linop::{invert_with_certificates, resolvent_inverse, BlockOperator};
use nlsqp_core::newton::*;
use nlsqp_core::verify::{evolve_drift, pde_residual, CollocationGrid};
use nlsqp_core::{ProblemSpec, SiteIndex};

type Outcome = Result<String, String>;

fn plane_wave(a: f64, delta: f64) -> ProblemSpec {
    ProblemSpec::from_lists(1, 1, delta, &[vec![2]], &[a]).unwrap()
}

fn two_mode(delta: f64) -> ProblemSpec {
    ProblemSpec::from_lists(1, 1, delta, &[vec![1], vec![2]], &[0.6, 0.8]).unwrap()
}

fn planar(delta: f64) -> ProblemSpec {
    ProblemSpec::from_lists(2, 2, delta, &[vec![1, 0], vec![0, 1]], &[0.6, 0.8]).unwrap()
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn plane_wave_exactness() -> Outcome {
    let (a, delta) = (0.7, 1e-3);
    let spec = plane_wave(a, delta);
    let r = solve(&spec, &SolveOptions::default()).map_err(err)?;
    let w_err = (r.state.omega.omega[0] - (4.0 + delta * a * a)).abs();
    let pde = pde_residual(&r.state.u, &r.state.omega, &spec, CollocationGrid::new(32, 16))
        .map_err(err)?;
    ensure(
        r.iterations == 1 && w_err <= 1e-12 && pde.sup <= 1e-12,
        format!(
            "steps {} |ω - (j² + δa²)| {w_err:.1e} collocation {:.1e}",
            r.iterations, pde.sup
        ),
    )
}

fn modulation_closed_form() -> Outcome {
    let (a1, a2, delta) = (0.6, 0.8, 1e-3);
    let spec = two_mode(delta);
    let opts = SolveOptions::default();
    let (_, m) = first_iteration(&spec, &opts).map_err(err)?;
    // oracle: (u*v)*u by hand at the two seed sites
    let (u, v) = linear_solution(&spec).map_err(err)?;
    let nl = convolve(&conv_power(&convolve(&u, &v).map_err(err)?, 1).map_err(err)?, &u)
        .map_err(err)?;
    let oracle = [
        delta * nl.get(&spec.seed_site(0)).re / a1,
        delta * nl.get(&spec.seed_site(1)).re / a2,
    ];
    let closed = [
        delta * (a1 * a1 + 2.0 * a2 * a2),
        delta * (2.0 * a1 * a1 + a2 * a2),
    ];
    let dw_err = (0..2)
        .map(|k| {
            (m.delta_omega.omega[k] - closed[k])
                .abs()
                .max((oracle[k] - closed[k]).abs())
        })
        .fold(0.0, f64::max);
    let det_want = -12.0 * delta * delta * a1 * a2;
    let det_rel = ((m.jac_det - det_want) / det_want).abs();
    ensure(
        dw_err <= 1e-10 && det_rel <= 1e-8,
        format!("|Δω - closed form| {dw_err:.1e} det(∂ω/∂a) rel. error {det_rel:.1e}"),
    )
}

fn scaling_laws() -> Outcome {
    let deltas = [1e-2, 1e-3, 1e-4];
    let opts = SolveOptions::default();
    let (mut du, mut post, mut dw, mut inv) = (vec![], vec![], vec![], vec![]);
    for &delta in &deltas {
        let spec = two_mode(delta);
        let (_, m) = first_iteration(&spec, &opts).map_err(err)?;
        du.push(m.delta_u_norm.ln());
        post.push(m.post_step_residual.ln());
        dw.push(m.delta_omega.norm().ln());
        let (u0, v0) = linear_solution(&spec).map_err(err)?;
        let sbox = opts.truncation(delta);
        let op = BlockOperator::assemble(&u0, &v0, &spec.omega0().omega, &spec, sbox)
            .map_err(err)?;
        let set = solve_set(&op, &spec, opts.block_limit).map_err(err)?;
        let cert = invert_with_certificates(&op, &set, 0.0).map_err(err)?;
        inv.push(cert.norm.ln());
    }
    let x: Vec<f64> = deltas.iter().map(|d: &f64| d.ln()).collect();
    let (s_du, s_post, s_dw, s_inv) = (
        slope(&x, &du),
        slope(&x, &post),
        slope(&x, &dw),
        slope(&x, &inv),
    );
    ensure(
        (s_du - 1.0).abs() <= 0.15
            && s_post >= 2.8
            && (s_dw - 1.0).abs() <= 0.15
            && (s_inv + 1.0).abs() <= 0.15,
        format!(
            "slopes ‖Δu‖ {s_du:.3} post-step residual {s_post:.3} ‖Δω‖ {s_dw:.3} ‖F'⁻¹‖ {s_inv:.3}"
        ),
    )
}

fn decay_certificate() -> Outcome {
    let delta = 1e-3;
    let spec = two_mode(delta);
    let opts = SolveOptions::default();
    let (u0, v0) = linear_solution(&spec).map_err(err)?;
    let op = BlockOperator::assemble(
        &u0,
        &v0,
        &spec.omega0().omega,
        &spec,
        opts.truncation(delta),
    )
    .map_err(err)?;
    let set = solve_set(&op, &spec, opts.block_limit).map_err(err)?;
    let cert = invert_with_certificates(&op, &set, 0.0).map_err(err)?;
    let beta = cert.decay.beta_certified;
    // independent recheck of every far entry
    let inv: DMatrix<Complex64> = resolvent_inverse(&op, &set, 0.0, 1e-13)
        .map_err(err)?
        .ok_or("resolvent expansion diverged")?;
    let cutoff = 1.0 / (beta * beta);
    let (mut checked, mut violations) = (0usize, 0usize);
    for i in 0..set.len() {
        for k in 0..set.len() {
            let r = (&set[i].site - &set[k].site).l1() as f64;
            if r > cutoff {
                checked += 1;
                if inv[(i, k)].norm() > delta.powf(beta * r) {
                    violations += 1;
                }
            }
        }
    }
    ensure(
        beta >= 0.05 && checked > 0 && violations == 0,
        format!(
            "β̂ {beta:.3} (fit {:.3}), {checked} entries beyond distance {cutoff:.1}, {violations} violations",
            cert.decay.beta_fit
        ),
    )
}

fn random_cubic_spec(rng: &mut ChaCha8Rng) -> ProblemSpec {
    let b = rng.random_range(1..=5);
    let mut js: Vec<i64> = Vec::new();
    while js.len() < b {
        let j = rng.random_range(-6i64..=6);
        if j != 0 && !js.contains(&j) {
            js.push(j);
        }
    }
    let j_list: Vec<Vec<i64>> = js.into_iter().map(|j| vec![j]).collect();
    let a: Vec<f64> = (0..b).map(|_| rng.random_range(0.1..=1.0)).collect();
    ProblemSpec::from_lists(1, 1, 1e-3, &j_list, &a).unwrap()
}

fn condition_checkers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for _ in 0..20 {
        let spec = random_cubic_spec(&mut rng);
        let ci = check_condition_i(&spec).map_err(err)?;
        let (sbox, radius) = condition_ii_box(&spec);
        let cii = check_condition_ii(&spec, 8, sbox, radius).map_err(err)?;
        if ci.verdict != Verdict::Pass || cii.verdict != Verdict::Pass {
            failures.push(format!("{:?}", spec.j_list()));
        }
    }
    let rank_1d = rank_check_momenta(&[vec![1], vec![2], vec![3]], 1);
    let rank_2d = rank_check_momenta(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]], 2);
    let kernel = rank_check_momenta(&[vec![1], vec![2], vec![3], vec![4]], 1);

    let spec = two_mode(1e-3);
    let omega0 = spec.omega0_int();
    let mut s = symbol_supports(&spec, 20).map_err(err)?;
    s.gpp.insert(SiteIndex::new(vec![-3, 0], vec![1]));
    s.gpp.insert(SiteIndex::new(vec![3, 0], vec![-1]));
    let r = walk_check(&s, &omega0, 1, 4, 4);
    let walk_ok = r.verdict == Verdict::Fail
        && matches!(&r.witnesses[0], Witness::Walk(w) if verify_walk(w, &s, &omega0));

    ensure(
        failures.is_empty()
            && rank_1d == RankVerdict::Pass { det: Some(2) }
            && rank_2d == RankVerdict::Pass { det: Some(-2) }
            && kernel == RankVerdict::Inconclusive { kernel: vec![-1, 3, -3, 1] }
            && walk_ok,
        format!(
            "20 random cubic lists: {} failing {failures:?}; rank 1d {rank_1d:?}, 2d {rank_2d:?}; \
             (1,2,3,4) {kernel:?}; injected spiral fails with verified walk: {walk_ok}",
            failures.len()
        ),
    )
}

fn resonance_kill() -> Outcome {
    let (a1, a2, delta) = (0.6, 0.8, 1e-3);
    let spec = two_mode(delta);
    let (_, m) = first_iteration(&spec, &SolveOptions::default()).map_err(err)?;
    let n = [4.0, -1.0];
    let dot = |w: &[f64]| n[0] * w[0] + n[1] * w[1];
    let d0 = torus_distance(dot(&m.omega0.omega));
    let d1 = torus_distance(dot(&m.omega1.omega));
    let want = delta * (2.0 * a1 * a1 + 7.0 * a2 * a2);
    let dio = diophantine_check(&m.omega1.omega, 1e-2, 6.0, 20, delta);
    ensure(
        d0 == 0.0 && (d1 - want).abs() <= 1e-10 && dio.pass,
        format!(
            "‖n·ω⁰‖ {d0:.1e} ‖n·ω¹‖ - δ(2a₁²+7a₂²) {:.1e}; scan margin {:.3} (κ̂ {:.3e}) at n = {:?}",
            (d1 - want).abs(),
            dio.margin,
            dio.kappa_hat,
            dio.worst_n
        ),
    )
}

fn newton_convergence() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, spec) in [("two-mode", two_mode(1e-3)), ("planar", planar(1e-3))] {
        let r = solve(&spec, &SolveOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let pass = r.converged
            && r.iterations <= 6
            && *r.weighted_history.last().unwrap() < 1e-11
            && r.off_support_characteristic_mass <= 1e-11;
        ok &= pass;
        lines.push(format!(
            "{name}: {} steps, weighted residuals {}, r₊/r² {}, mass on C∖S {:.1e}",
            r.iterations, sci(&r.weighted_history), sci(&r.quadratic_ratios), r.off_support_characteristic_mass
        ));
    }
    ensure(ok, lines.join("; "))
}

fn time_evolution() -> Outcome {
    let spec = two_mode(1e-3);
    let r = solve(&spec, &SolveOptions::default()).map_err(err)?;
    let period = 2.0 * PI / r.state.omega.omega[0];
    let d = evolve_drift(&r.state.u, &r.state.omega, &spec, 100.0 * period, 2e-3).map_err(err)?;
    let rate_err = d
        .reference_phase_rate
        .iter()
        .zip(&r.modulation.delta_omega.omega)
        .map(|(got, dw)| (got - dw.abs()).abs() / dw.abs())
        .fold(0.0, f64::max);
    ensure(
        d.amplitude_drift < 1e-2 && rate_err <= 0.2 && d.mass_error <= 1e-10,
        format!(
            "amplitude drift {:.1e}, reference phase rate {} vs |Δω¹| (rel. {rate_err:.1e}), mass {:.1e}",
            d.amplitude_drift, sci(&d.reference_phase_rate), d.mass_error
        ),
    )
}

fn excision_fraction() -> Outcome {
    let spec = plane_wave(0.5, 1e-3);
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let n = 10_000;
    let table = excision_sweep(&spec, &eps, n, 20_261_015, SiteBox::new(4, 4), &SolveOptions::default())
        .map_err(err)?;
    let row = &table.rows[2];
    // P(3a⁴ < ε) for a ~ U(0, 1]
    let analytic = (row.epsilon / 3.0).powf(0.25);
    let sigma = (analytic * (1.0 - analytic) / n as f64).sqrt();
    let monotone = table.rows.windows(2).all(|w| w[1].fraction <= w[0].fraction);
    let fractions: Vec<f64> = table.rows.iter().map(|r| r.fraction).collect();
    ensure(
        (row.fraction - analytic).abs() <= 2.0 * sigma && monotone,
        format!(
            "ε = 1e-3: empirical {:.4} analytic {analytic:.4} (2σ = {:.4}); fractions {fractions:.4?}",
            row.fraction,
            2.0 * sigma
        ),
    )
}

/// Fit tolerance on the frequency-shift exponent: the O(δ²) correction to the
/// shift lowers a finite-range fit by a few 1e-4.
const EXPONENT_FIT_TOL: f64 = 1e-2;

fn frequency_shift_exponent() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for p in [1u32, 2] {
        let mut log_a = Vec::new();
        let mut log_shift: Vec<Vec<f64>> = vec![Vec::new(); 2];
        for delta in [1e-2, 1e-3, 1e-4, 1e-5] {
            let spec = ProblemSpec::from_lists(1, p, delta, &[vec![1], vec![2]], &[0.6, 0.8])
                .map_err(err)?;
            let r = solve(&spec, &SolveOptions::default()).map_err(err)?;
            // physical amplitude scale: A_k = δ^{1/(2p)} a_k with a fixed
            log_a.push(r.physical_amplitudes[0].ln());
            for k in 0..2 {
                log_shift[k].push(r.frequency_shift[k].abs().ln());
            }
        }
        let e = log_shift
            .iter()
            .map(|ys| slope(&log_a, ys))
            .fold(f64::INFINITY, f64::min);
        let target = 2.0 * p as f64;
        ok &= e >= target - EXPONENT_FIT_TOL;
        lines.push(format!("p = {p}: exponent {e:.5} (2p = {target}, 2p+1 not asserted)"));
    }
    ensure(ok, lines.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("1 plane-wave exactness", plane_wave_exactness, Duration::from_secs(1)),
        ("2 modulation closed form", modulation_closed_form, Duration::from_secs(1)),
        ("3 scaling laws", scaling_laws, Duration::from_secs(60)),
        ("4 decay certificate", decay_certificate, Duration::from_secs(60)),
        ("5 condition checkers", condition_checkers, Duration::from_secs(10)),
        ("6 resonance kill", resonance_kill, Duration::from_secs(10)),
        ("7 Newton convergence", newton_convergence, Duration::from_secs(120)),
        ("8 time evolution", time_evolution, Duration::from_secs(120)),
        ("9 excision sweep", excision_fraction, Duration::from_secs(60)),
        ("10 frequency-shift exponent", frequency_shift_exponent, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let over = elapsed > budget;
        let (tag, msg) = match (&outcome, over) {
            (Ok(m), false) => ("PASS", m.clone()),
            (Ok(m), true) => ("FAIL", format!("{m}; over the {budget:?} budget")),
            (Err(m), _) => ("FAIL", m.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] criterion {name} ({elapsed:.2?}): {msg}");
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
