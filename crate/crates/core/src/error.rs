use thiserror::Error;

/// Errors produced by the numerical and geometric routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    #[error("{func}: result overflows f64 (use the log-scaled variant)")]
    Overflow { func: &'static str },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {abs_error:e}")]
    QuadratureFailed { value: f64, abs_error: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("dimension mismatch: body lives in R^{body}, measure is on R^{expected}")]
    DimensionMismatch { body: usize, expected: usize },

    #[error("unsupported sphere rule: {0}")]
    UnsupportedRule(String),

    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { func, msg: msg.into() }
}
