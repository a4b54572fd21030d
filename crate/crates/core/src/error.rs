use thiserror::Error;

/// Errors produced by the numerical routines, the model constructors and the
/// inference pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkageError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge (best estimate {estimate}, error estimate {error_estimate})")]
    Convergence {
        what: &'static str,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("improper prior cannot be used where a normalized density is required")]
    ImproperPrior,

    #[error("unsupported prior: {0}")]
    UnsupportedPrior(String),

    #[error("degenerate hypothesis: point mass weight {0} leaves nothing to test")]
    DegenerateHypothesis(f64),

    #[error("no data: at least one meiosis is required")]
    NoData,

    #[error("no samples to bin")]
    EmptySamples,

    #[error("sample {value} lies outside the histogram range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid prior specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, LinkageError>;

pub(crate) fn domain(msg: impl Into<String>) -> LinkageError {
    LinkageError::Domain(msg.into())
}
