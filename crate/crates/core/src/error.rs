use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain of {n} sites exceeds the supported maximum of {max}")]
    Capacity { n: usize, max: usize },

    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("invalid spin quantum numbers: {0}")]
    InvalidSpin(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("cannot parse bipartition {label:?}: {reason}")]
    Parse { label: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sign change found in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("negativity still positive at the scan ceiling t = {t_max}")]
    Range { t_max: f64 },
}
