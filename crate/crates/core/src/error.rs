use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("envelope has zero norm on the integration window; moments are undefined")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("exceeded {max_steps} integration steps at t = {t}")]
    TooManySteps { max_steps: usize, t: f64 },

    #[error("density matrix lost positivity at t = {t}: smallest eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("joint space dimension {dim} exceeds the limit {limit}")]
    SpaceTooLarge { dim: usize, limit: usize },

    #[error(
        "two-excitation system needs ~{needed_mib:.0} MiB (limit {limit_mib:.0} MiB); \
         try at most {suggested_modes} modes"
    )]
    MemoryLimit {
        needed_mib: f64,
        limit_mib: f64,
        suggested_modes: usize,
    },

    #[error("mixture weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("table {path}: {reason}")]
    Table { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
