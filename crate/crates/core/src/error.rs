//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Array shapes do not line up (e.g. design rows vs. response length).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A NaN or infinity was found where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A scalar or structural parameter is outside its legal range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The capped simplex is empty or the cap admits no solution.
    #[error("infeasible capped simplex: {0}")]
    InfeasibleSimplex(String),

    /// Truncation removed every sample, so no regression can be fit.
    #[error("no samples retained after truncation")]
    NoRetainedSamples,

    /// The weight solver's certificate exceeded the cutoff and the caller
    /// asked for a hard failure rather than a uniform-weight fallback.
    #[error("weight certificate {certificate:.6e} exceeds cutoff {tau_cut:.6e}")]
    WeightCertificate { certificate: f64, tau_cut: f64 },

    /// A text input (dataset, config, or results file) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
