//! Report structures (serialized as TOML) and the plain-text solution table.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use nlsqp_core::conditions::{ConditionReport, RankVerdict};
use nlsqp_core::lattice::{FrequencyVector, SiteIndex, SparseSeries};
use nlsqp_core::newton::{DiophantineReport, SolveReport, SweepTable};
use nlsqp_core::verify::{DriftReport, PdeResidual};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
}

impl Header {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Self {
            tool: "nlsqp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config_hash.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub name: String,
    pub verdict: String,
    pub witnesses: Vec<String>,
    pub parameters: Vec<[String; 2]>,
    pub notes: Vec<String>,
    pub parts: Vec<ConditionSummary>,
}

impl From<&ConditionReport> for ConditionSummary {
    fn from(r: &ConditionReport) -> Self {
        Self {
            name: r.name.clone(),
            verdict: format!("{:?}", r.verdict),
            witnesses: r.witnesses.iter().map(|w| w.to_string()).collect(),
            parameters: r
                .parameters
                .iter()
                .map(|(k, v)| [k.clone(), v.clone()])
                .collect(),
            notes: r.notes.clone(),
            parts: r.parts.iter().map(Self::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummary {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<i64>>,
}

impl From<&RankVerdict> for RankSummary {
    fn from(r: &RankVerdict) -> Self {
        match r {
            RankVerdict::Pass { det } => Self {
                verdict: "Pass".into(),
                det: det.map(|d| d.to_string()),
                kernel: None,
            },
            RankVerdict::Inconclusive { kernel } => Self {
                verdict: "Inconclusive".into(),
                det: None,
                kernel: Some(kernel.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub header: Header,
    pub condition_i: ConditionSummary,
    pub condition_ii: ConditionSummary,
    pub rank_test: RankSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oned: Option<ConditionSummary>,
    /// Connections `j -> j + Δj` found by the one-dimensional analysis.
    pub oned_pairs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub condition_i: String,
    pub condition_ii: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineSummary {
    pub pass: bool,
    pub worst_n: Vec<i64>,
    pub worst_distance: f64,
    pub margin: f64,
    pub kappa_hat: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_radius: i64,
}

impl From<&DiophantineReport> for DiophantineSummary {
    fn from(d: &DiophantineReport) -> Self {
        Self {
            pass: d.pass,
            worst_n: d.worst_n.clone(),
            worst_distance: d.worst_distance,
            margin: d.margin,
            kappa_hat: d.kappa_hat,
            kappa: d.kappa,
            gamma: d.gamma,
            n_radius: d.n_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequencies {
    pub omega0: Vec<f64>,
    pub omega1: Vec<f64>,
    pub omega: Vec<f64>,
    /// `ω_k − |j_k|² − m`.
    pub shift: Vec<f64>,
    pub physical_amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Modulation {
    pub delta_omega: Vec<f64>,
    pub jacobian: Vec<Vec<f64>>,
    pub jacobian_det: f64,
    pub jacobian_fd_rel_error: f64,
    pub delta_u_norm: f64,
    pub initial_residual: f64,
    pub post_step_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificates {
    pub first_step_blocks: usize,
    pub min_normalized_det: f64,
    pub excision_epsilon: f64,
    pub second_step_blocks: usize,
    pub second_step_max_block: usize,
    pub second_step_min_eigenvalue: f64,
    pub second_step_threshold: f64,
    pub diophantine: DiophantineSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub weighted_residual: f64,
    pub residual_history: Vec<f64>,
    pub weighted_history: Vec<f64>,
    pub quadratic_ratios: Vec<f64>,
    pub off_support_characteristic_mass: f64,
    pub support_size: usize,
    pub box_n_radius: i64,
    pub box_j_radius: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub header: Header,
    pub gate: Gate,
    pub frequencies: Frequencies,
    pub modulation: Modulation,
    pub certificates: Certificates,
    pub convergence: Convergence,
}

impl SolveSummary {
    pub fn new(header: Header, gate: Gate, r: &SolveReport, excision_epsilon: f64) -> Self {
        let m = &r.modulation;
        let jac = (0..m.jacobian.nrows())
            .map(|i| m.jacobian.row(i).iter().copied().collect())
            .collect();
        Self {
            header,
            gate,
            frequencies: Frequencies {
                omega0: m.omega0.omega.clone(),
                omega1: m.omega1.omega.clone(),
                omega: r.state.omega.omega.clone(),
                shift: r.frequency_shift.clone(),
                physical_amplitudes: r.physical_amplitudes.clone(),
            },
            modulation: Modulation {
                delta_omega: m.delta_omega.omega.clone(),
                jacobian: jac,
                jacobian_det: m.jac_det,
                jacobian_fd_rel_error: m.jacobian_fd_rel_error,
                delta_u_norm: m.delta_u_norm,
                initial_residual: m.initial_residual,
                post_step_residual: m.post_step_residual,
            },
            certificates: Certificates {
                first_step_blocks: m.first_step_blocks,
                min_normalized_det: m.min_normalized_det,
                excision_epsilon,
                second_step_blocks: r.second_step.blocks,
                second_step_max_block: r.second_step.max_block_size,
                second_step_min_eigenvalue: r.second_step.min_abs_eigenvalue,
                second_step_threshold: r.second_step.threshold,
                diophantine: (&m.diophantine).into(),
            },
            convergence: Convergence {
                converged: r.converged,
                iterations: r.iterations,
                residual: r.state.residual,
                weighted_residual: r.state.weighted_residual,
                residual_history: r.residual_history.clone(),
                weighted_history: r.weighted_history.clone(),
                quadratic_ratios: r.quadratic_ratios.clone(),
                off_support_characteristic_mass: r.off_support_characteristic_mass,
                support_size: r.state.u.len(),
                box_n_radius: r.sbox.n_radius,
                box_j_radius: r.sbox.j_radius,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub header: Header,
    pub lattice_residual: f64,
    pub weighted_residual: f64,
    pub collocation: Collocation,
    pub drift: Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collocation {
    pub sup: f64,
    pub mean: f64,
    pub scale: f64,
    pub points: usize,
    pub t_points: usize,
    pub x_points: usize,
}

impl Collocation {
    pub fn new(r: &PdeResidual, t_points: usize, x_points: usize) -> Self {
        Self {
            sup: r.sup,
            mean: r.mean,
            scale: r.scale,
            points: r.points,
            t_points,
            x_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drift {
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub grid_points: usize,
    pub amplitude_drift: f64,
    pub phase_error: f64,
    pub reference_phase_rate: Vec<f64>,
    pub frequency_shift: Vec<f64>,
    pub mass_error: f64,
}

impl From<&DriftReport> for Drift {
    fn from(d: &DriftReport) -> Self {
        Self {
            t_final: d.t_final,
            dt: d.dt,
            steps: d.steps,
            grid_points: d.grid_points,
            amplitude_drift: d.amplitude_drift,
            phase_error: d.phase_error,
            reference_phase_rate: d.reference_phase_rate.clone(),
            frequency_shift: d.frequency_shift.clone(),
            mass_error: d.mass_error,
        }
    }
}

pub fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("report serializes")
}

/// Per-ε table: excised fraction, its binomial error, and how many samples
/// also fail the Diophantine scan.
pub fn sweep_csv(t: &SweepTable) -> String {
    let mut out = String::from("epsilon,samples,excised,fraction,sigma,non_diophantine,excised_or_non_diophantine\n");
    let nd = t.samples.iter().filter(|s| s.diophantine_margin < 1.0).count();
    for r in &t.rows {
        let either = t
            .samples
            .iter()
            .filter(|s| s.min_normalized_det < r.epsilon || s.diophantine_margin < 1.0)
            .count();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epsilon, r.samples, r.excised, r.fraction, r.sigma, nd, either
        );
    }
    out
}

/// One line per sample: amplitudes, smallest normalized determinant, Diophantine margin.
pub fn sweep_samples_csv(t: &SweepTable) -> String {
    let b = t.samples.first().map(|s| s.a.len()).unwrap_or(0);
    let mut out = String::from("sample");
    for k in 1..=b {
        let _ = write!(out, ",a{k}");
    }
    out.push_str(",min_normalized_det,diophantine_margin\n");
    for (i, s) in t.samples.iter().enumerate() {
        let _ = write!(out, "{i}");
        for a in &s.a {
            let _ = write!(out, ",{a}");
        }
        let _ = writeln!(out, ",{},{}", s.min_normalized_det, s.diophantine_margin);
    }
    out
}

/// `omega w_1 .. w_b` then one line `n_1 .. n_b j_1 .. j_d re im` per coefficient.
/// Floats use the shortest representation that round-trips exactly.
pub fn write_solution(u: &SparseSeries, omega: &FrequencyVector) -> String {
    let mut out = String::from("# nlsqp solution: coefficients u(n, j) of the scaled field\n");
    let _ = writeln!(out, "b {}\nd {}", u.b(), u.d());
    out.push_str("omega");
    for w in &omega.omega {
        let _ = write!(out, " {w}");
    }
    out.push('\n');
    for (s, c) in u.iter() {
        for x in s.n.iter().chain(&s.j) {
            let _ = write!(out, "{x} ");
        }
        let _ = writeln!(out, "{} {}", c.re, c.im);
    }
    out
}

pub fn read_solution(text: &str) -> Result<(SparseSeries, FrequencyVector), CliError> {
    let bad = |line: usize, msg: &str| CliError::Config(format!("solution line {line}: {msg}"));
    let (mut b, mut d, mut omega) = (None, None, None);
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let head = it.next().unwrap_or_default();
        match head {
            "b" | "d" => {
                let v: usize = it
                    .next()
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| bad(ln, "expected an integer"))?;
                if head == "b" { b = Some(v) } else { d = Some(v) }
            }
            "omega" => {
                let w: Result<Vec<f64>, _> = it.map(str::parse).collect();
                omega = Some(w.map_err(|_| bad(ln, "bad frequency"))?);
            }
            _ => {
                let (b, d) = b.zip(d).ok_or_else(|| bad(ln, "b and d must precede the table"))?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != b + d + 2 {
                    return Err(bad(ln, &format!("expected {} fields", b + d + 2)));
                }
                let ints: Result<Vec<i64>, _> = fields[..b + d].iter().map(|x| x.parse()).collect();
                let ints = ints.map_err(|_| bad(ln, "bad lattice index"))?;
                let re: f64 = fields[b + d].parse().map_err(|_| bad(ln, "bad real part"))?;
                let im: f64 = fields[b + d + 1].parse().map_err(|_| bad(ln, "bad imaginary part"))?;
                terms.push((
                    SiteIndex::new(ints[..b].to_vec(), ints[b..].to_vec()),
                    Complex64::new(re, im),
                ));
            }
        }
    }
    let (b, d) = b.zip(d).ok_or_else(|| bad(0, "missing b or d"))?;
    let omega = omega.ok_or_else(|| bad(0, "missing omega line"))?;
    if omega.len() != b {
        return Err(bad(0, "omega length differs from b"));
    }
    Ok((SparseSeries::from_terms(b, d, terms), FrequencyVector::new(omega)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solution_table_round_trips_bit_exactly() {
        let u = SparseSeries::from_terms(
            2,
            1,
            [
                (SiteIndex::new(vec![-1, 0], vec![1]), Complex64::new(0.6, 0.0)),
                (SiteIndex::new(vec![1, -2], vec![3]), Complex64::new(-1.234567890123e-7, 3e-300)),
            ],
        );
        let w = FrequencyVector::new(vec![1.0016395653129457, 4.0 + 1e-3 / 3.0]);
        let (u2, w2) = read_solution(&write_solution(&u, &w)).unwrap();
        assert_eq!(u, u2);
        assert_eq!(w, w2);
        assert!(read_solution("b 2\nd 1\nomega 1 2\n-1 0 1 0.5\n").is_err());
    }
}
