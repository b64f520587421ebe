use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected (b, d) = ({b}, {d}), got ({got_b}, {got_d})")]
    DimensionMismatch {
        b: usize,
        d: usize,
        got_b: usize,
        got_d: usize,
    },

    #[error("box holds {count} sites, above the configured cap of {cap}")]
    TooManySites { count: usize, cap: usize },

    #[error("dense block of size {size} exceeds the limit {limit}; reduce the truncation")]
    BlockTooLarge { size: usize, limit: usize },

    #[error("excised amplitude: block {block} (size {size}) has |P_k| = {value:e} below threshold {threshold:e}")]
    Excised {
        block: usize,
        size: usize,
        value: f64,
        threshold: f64,
    },

    #[error("off-characteristic block ill-conditioned: |diagonal| = {min_diagonal:e} at {site}")]
    IllConditioned { min_diagonal: f64, site: String },

    #[error("amplitude a_{k} = {value:e} is effectively zero ({reason})")]
    DegenerateAmplitude { k: usize, value: f64, reason: String },

    #[error("frequency omega_{k} has imaginary part {imag:e}")]
    NonRealFrequency { k: usize, imag: f64 },

    #[error("newton step rejected: residual grew from {before:e} to {after:e}")]
    StepRejected { before: f64, after: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("admissibility condition not satisfied: {0}")]
    ConditionFailed(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("split-step integration unstable; try dt <= {suggested_dt:e}")]
    Unstable { suggested_dt: f64 },

    #[error("singular matrix in dense solve (component of size {size})")]
    Singular { size: usize },
}
