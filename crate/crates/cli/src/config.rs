//! Run configuration: TOML in, validated `RunConfig` out, canonical TOML back.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nlsqp_core::characteristics::SiteBox;
use nlsqp_core::newton::SolveOptions;
use nlsqp_core::ProblemSpec;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub conditions: ConditionsConfig,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    pub p: u32,
    pub delta: f64,
    #[serde(default)]
    pub phase_m: f64,
    /// One momentum vector of length `d` per mode.
    pub j: Vec<Vec<i64>>,
    pub a: Vec<f64>,
}

/// Omitted radii mean the cube `⌈|log δ|^s⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_radius: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_radius: Option<i64>,
    pub second_step_s: f64,
    pub block_limit: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            n_radius: None,
            j_radius: None,
            second_step_s: o.second_step_s,
            block_limit: o.block_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsConfig {
    pub max_depth: usize,
    /// Box j-radius of the non-spiral check; omitted means `2 max|j_k| + 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_radius: Option<i64>,
    /// Search radius for difference-class witnesses; omitted means `10 × j_radius`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_radius: Option<i64>,
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        Self {
            max_depth: SolveOptions::default().max_depth,
            j_radius: None,
            search_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub excision_epsilon: f64,
    pub second_step_epsilon: f64,
    pub kappa: f64,
    /// Omitted means `2b + 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub diophantine_radius: i64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            excision_epsilon: o.excision_epsilon,
            second_step_epsilon: o.second_step_epsilon,
            kappa: o.kappa,
            gamma: None,
            diophantine_radius: o.diophantine_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Evolution time in periods of the first frequency.
    pub periods: f64,
    pub dt: f64,
    pub t_points: usize,
    pub x_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            periods: 100.0,
            dt: 2e-3,
            t_points: 64,
            x_points: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub n_radius: i64,
    pub j_radius: i64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4],
            n_samples: 1000,
            seed: 1,
            n_radius: 6,
            j_radius: 6,
        }
    }
}

/// 1-based line of `key` inside `[section]`, for diagnostics.
fn line_of(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn reject(src: &str, section: &str, key: &str, msg: String) -> CliError {
    let at = line_of(src, section, key)
        .map(|l| format!("line {l}: "))
        .unwrap_or_default();
    CliError::Config(format!("{at}[{section}] {key}: {msg}"))
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    fn validate(&self, src: &str) -> Result<(), CliError> {
        let pr = &self.problem;
        if pr.j.len() != pr.a.len() {
            return Err(reject(
                src,
                "problem",
                "a",
                format!("{} amplitudes for {} momenta", pr.a.len(), pr.j.len()),
            ));
        }
        for (k, j) in pr.j.iter().enumerate() {
            if j.len() != pr.d {
                return Err(reject(
                    src,
                    "problem",
                    "j",
                    format!("j_{k} has {} components but d = {}", j.len(), pr.d),
                ));
            }
            if j.iter().all(|&x| x == 0) {
                return Err(reject(
                    src,
                    "problem",
                    "j",
                    format!("j_{k} = 0; every seed momentum must satisfy j_k != 0"),
                ));
            }
            if let Some(k2) = pr.j[..k].iter().position(|o| o == j) {
                return Err(reject(
                    src,
                    "problem",
                    "j",
                    format!("j_{k} duplicates j_{k2}"),
                ));
            }
        }
        if let Err(e) = self.spec() {
            return Err(reject(src, "problem", "delta", e.to_string()));
        }
        let positive = [
            ("truncation", "n_radius", self.truncation.n_radius.unwrap_or(1)),
            ("truncation", "j_radius", self.truncation.j_radius.unwrap_or(1)),
            ("truncation", "block_limit", self.truncation.block_limit as i64),
            ("conditions", "max_depth", self.conditions.max_depth as i64),
            ("conditions", "j_radius", self.conditions.j_radius.unwrap_or(1)),
            ("conditions", "search_radius", self.conditions.search_radius.unwrap_or(1)),
            ("newton", "max_iter", self.newton.max_iter as i64),
            ("newton", "diophantine_radius", self.newton.diophantine_radius),
            ("verify", "t_points", self.verify.t_points as i64),
            ("verify", "x_points", self.verify.x_points as i64),
            ("sweep", "n_radius", self.sweep.n_radius),
            ("sweep", "j_radius", self.sweep.j_radius),
        ];
        for (section, key, v) in positive {
            if v <= 0 {
                return Err(reject(src, section, key, format!("must be positive, got {v}")));
            }
        }
        let reals = [
            ("truncation", "second_step_s", self.truncation.second_step_s),
            ("newton", "tol", self.newton.tol),
            ("newton", "excision_epsilon", self.newton.excision_epsilon),
            ("newton", "second_step_epsilon", self.newton.second_step_epsilon),
            ("newton", "kappa", self.newton.kappa),
            ("newton", "gamma", self.newton.gamma.unwrap_or(1.0)),
            ("verify", "periods", self.verify.periods),
            ("verify", "dt", self.verify.dt),
        ];
        for (section, key, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(reject(src, section, key, format!("must be positive and finite, got {v}")));
            }
        }
        if self.sweep.n_samples < 100 {
            return Err(reject(
                src,
                "sweep",
                "n_samples",
                format!("need at least 100 samples, got {}", self.sweep.n_samples),
            ));
        }
        if self.sweep.epsilons.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(reject(src, "sweep", "epsilons", "entries must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> nlsqp_core::Result<ProblemSpec> {
        let pr = &self.problem;
        Ok(ProblemSpec::from_lists(pr.d, pr.p, pr.delta, &pr.j, &pr.a)?.with_phase(pr.phase_m))
    }

    pub fn truncation_box(&self) -> Option<SiteBox> {
        let t = &self.truncation;
        match (t.n_radius, t.j_radius) {
            (None, None) => None,
            (n, j) => {
                let auto = SolveOptions {
                    second_step_s: t.second_step_s,
                    ..SolveOptions::default()
                }
                .truncation(self.problem.delta);
                Some(SiteBox::new(
                    n.unwrap_or(auto.n_radius),
                    j.unwrap_or(auto.j_radius),
                ))
            }
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let n = &self.newton;
        SolveOptions {
            tol: n.tol,
            max_iter: n.max_iter,
            second_step_s: self.truncation.second_step_s,
            sbox: self.truncation_box(),
            excision_epsilon: n.excision_epsilon,
            second_step_epsilon: n.second_step_epsilon,
            kappa: n.kappa,
            gamma: n.gamma,
            diophantine_radius: n.diophantine_radius,
            check_conditions: true,
            max_depth: self.conditions.max_depth,
            block_limit: self.truncation.block_limit,
            weight: None,
        }
    }
}
