use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid truncation: need at least 2 Fock levels, got {0}")]
    InvalidTruncation(usize),

    #[error(
        "under-resolved truncation in {what}: top-level population {population:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    UnderResolved {
        what: &'static str,
        population: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model condition violated: {0}")]
    ConditionViolated(String),

    #[error("integration quality: {0}")]
    IntegrationQuality(String),

    #[error("spectrum truncated: {0}")]
    SpectrumTruncated(String),

    #[error("spectrum format: {0}")]
    SpectrumFormat(String),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
