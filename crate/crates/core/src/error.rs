use thiserror::Error;

/// Errors produced by the estimators and their supporting machinery.
#[derive(Debug, Error)]
pub enum MonkError {
    #[error("kernel `{kernel}` cannot evaluate {point} points")]
    DomainMismatch { kernel: String, point: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{n} samples cannot be split into {q} equal blocks")]
    NotDivisible { n: usize, q: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not PSD within tolerance (max jitter {0:.3e})")]
    NotPsd(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("every kernel in the grid failed to evaluate")]
    AllGridPointsFailed,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, MonkError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> MonkError {
    MonkError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
