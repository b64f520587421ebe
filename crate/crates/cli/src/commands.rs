//! `check`, `solve`, `verify` and `sweep`, each returning the report text and an exit code.

use std::path::Path;

use nlsqp_core::characteristics::SiteBox;
use nlsqp_core::conditions::{check_condition_i, check_condition_ii, oned_check, rank_check_momenta, Verdict};
use nlsqp_core::newton::{condition_ii_box, excision_sweep, residual_series, solve, SolveOptions};
use nlsqp_core::verify::{evolve_drift, pde_residual, weighted_norm, CollocationGrid, WeightSpec};
use nlsqp_core::{Error, ProblemSpec};

use crate::config::RunConfig;
use crate::report::*;
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONDITION: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_EXCISED: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
        CliError::Core(e) => match e {
            Error::ConditionFailed(_) => EXIT_CONDITION,
            Error::Excised { .. } | Error::DegenerateAmplitude { .. } => EXIT_EXCISED,
            Error::NotConverged { .. }
            | Error::StepRejected { .. }
            | Error::Singular { .. }
            | Error::IllConditioned { .. }
            | Error::NonRealFrequency { .. }
            | Error::Unstable { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_CONFIG,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

fn condition_box(cfg: &RunConfig, spec: &ProblemSpec) -> (SiteBox, i64) {
    let (default_box, default_radius) = condition_ii_box(spec);
    let sbox = match cfg.conditions.j_radius {
        Some(r) => SiteBox::from_j_radius(r).within_budget(spec.b(), spec.d, 200_000),
        None => default_box,
    };
    let radius = cfg
        .conditions
        .search_radius
        .unwrap_or(if cfg.conditions.j_radius.is_some() { 10 * sbox.j_radius } else { default_radius });
    (sbox, radius)
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let ci = check_condition_i(&spec)?;
    let (sbox, radius) = condition_box(cfg, &spec);
    let cii = check_condition_ii(&spec, cfg.conditions.max_depth, sbox, radius)?;
    let rank = rank_check_momenta(&spec.j_list(), spec.d);
    let (oned, oned_pairs) = if spec.d == 1 {
        let (r, pairs) = oned_check(&spec)?;
        let pairs = pairs
            .iter()
            .map(|p| {
                format!(
                    "j = {} -> {} via {} ({}, {})",
                    p.j,
                    p.j + p.dj,
                    p.diff,
                    if p.same_branch { "same branch" } else { "opposite branch" },
                    if p.cubic_type { "cubic type" } else { "non-cubic" }
                )
            })
            .collect();
        (Some((&r).into()), pairs)
    } else {
        (None, Vec::new())
    };
    let code = if ci.verdict == Verdict::Pass && cii.verdict == Verdict::Pass {
        EXIT_OK
    } else {
        EXIT_CONDITION
    };
    let report = CheckReport {
        header: Header::new("check", &cfg.hash()),
        condition_i: (&ci).into(),
        condition_ii: (&cii).into(),
        rank_test: (&rank).into(),
        oned,
        oned_pairs,
    };
    Ok(Outcome {
        code,
        report: to_toml(&report),
    })
}

/// Runs the solver after gating on both conditions; returns the report and the solution table.
pub fn solve_command(cfg: &RunConfig) -> Result<(Outcome, Option<String>), CliError> {
    let spec = cfg.spec()?;
    let ci = check_condition_i(&spec)?;
    let (sbox, radius) = condition_box(cfg, &spec);
    let cii = check_condition_ii(&spec, cfg.conditions.max_depth, sbox, radius)?;
    let gate = Gate {
        condition_i: format!("{:?}", ci.verdict),
        condition_ii: format!("{:?}", cii.verdict),
    };
    if ci.verdict != Verdict::Pass || cii.verdict != Verdict::Pass {
        let witnesses: Vec<String> = ci
            .witnesses
            .iter()
            .chain(&cii.witnesses)
            .map(|w| w.to_string())
            .collect();
        return Err(Error::ConditionFailed(format!(
            "solve refused (condition i {}, condition ii {}): {}",
            gate.condition_i,
            gate.condition_ii,
            witnesses.join("; ")
        ))
        .into());
    }
    let opts = SolveOptions {
        check_conditions: false,
        ..cfg.solve_options()
    };
    let r = solve(&spec, &opts)?;
    let summary = SolveSummary::new(
        Header::new("solve", &cfg.hash()),
        gate,
        &r,
        opts.excision_epsilon,
    );
    Ok((
        Outcome {
            code: EXIT_OK,
            report: to_toml(&summary),
        },
        Some(write_solution(&r.state.u, &r.state.omega)),
    ))
}

pub fn verify_command(cfg: &RunConfig, solution: &str) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let (u, omega) = read_solution(solution)?;
    if u.b() != spec.b() || u.d() != spec.d {
        return Err(CliError::Config(format!(
            "solution has b = {}, d = {} but the configuration has b = {}, d = {}",
            u.b(),
            u.d(),
            spec.b(),
            spec.d
        )));
    }
    let v = nlsqp_core::lattice::conjugate_flip(&u);
    let (fu, fv) = residual_series(&u, &v, &omega.omega, &spec)?;
    let w = WeightSpec::for_spec(&spec);
    let lattice = (fu.l2_norm().powi(2) + fv.l2_norm().powi(2)).sqrt();
    let weighted = (weighted_norm(&fu, w).powi(2) + weighted_norm(&fv, w).powi(2)).sqrt();
    let vc = &cfg.verify;
    let pde = pde_residual(&u, &omega, &spec, CollocationGrid::new(vc.t_points, vc.x_points))
        .map_err(|e| CliError::Config(format!("[verify] {e}")))?;
    let t_final = vc.periods * 2.0 * std::f64::consts::PI / omega.omega[0].abs();
    let drift = evolve_drift(&u, &omega, &spec, t_final, vc.dt)?;
    let summary = VerifySummary {
        header: Header::new("verify", &cfg.hash()),
        lattice_residual: lattice,
        weighted_residual: weighted,
        collocation: Collocation::new(&pde, vc.t_points, vc.x_points),
        drift: (&drift).into(),
    };
    Ok(Outcome {
        code: EXIT_OK,
        report: to_toml(&summary),
    })
}

/// Returns the ε table and the per-sample table.
pub fn sweep_command(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let spec = cfg.spec()?;
    let s = &cfg.sweep;
    let table = excision_sweep(
        &spec,
        &s.epsilons,
        s.n_samples,
        s.seed,
        SiteBox::new(s.n_radius, s.j_radius),
        &cfg.solve_options(),
    )?;
    Ok((sweep_csv(&table), sweep_samples_csv(&table)))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
