use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A series hit `hard_max_terms` before its tail bound fell below
    /// tolerance.
    #[error("truncation failure: tail bound {tail_bound:e} still above {tolerance:e} after {terms} terms")]
    Truncation {
        terms: usize,
        tail_bound: f64,
        tolerance: f64,
    },

    #[error("convergence failure after {levels} refinement levels (last change {last_change:e}, target {target:e})")]
    Convergence {
        levels: usize,
        last_change: f64,
        target: f64,
    },

    #[error("negative phase density {value:e} at phi = {phi}")]
    NegativeDensity { phi: f64, value: f64 },

    #[error("finite-s check requested s = {s}, limit is {max}")]
    DimensionTooLarge { s: usize, max: usize },

    #[error("consistency failure in {what}: difference {difference:e} exceeds {tolerance:e}")]
    Consistency {
        what: &'static str,
        difference: f64,
        tolerance: f64,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: line {line}: {message}")]
    Validation {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("adjustment `{0}` already applied")]
    DoubleAdjust(&'static str),

    #[error("table `{label}` is not GBL data")]
    NotGbl { label: String },

    #[error("unsupported figure `{0}`")]
    UnsupportedFigure(String),

    #[error("overlay `{label}` cannot be used with {figure}: {reason}")]
    OverlayMismatch {
        label: String,
        figure: &'static str,
        reason: &'static str,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
