use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The reduced mode variables are singular without an external field.
    #[error("field-free case unsupported: epsilon = qE/(mc) must be nonzero")]
    FieldFree,

    /// `|k_perp| = 0` with `k_par != 0`; the rapidity shift xi is infinite.
    #[error("on-axis mode: xi is infinite (use the small-z series path)")]
    OnAxis,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quadrature or series did not reach its tolerance within budget.
    /// `partial` carries the best available estimate.
    #[error("no convergence in {what}: partial = {partial:e}, error estimate = {error:e}")]
    NonConvergence {
        what: String,
        partial: f64,
        error: f64,
    },

    /// The infinite-window classical energy is divergent.
    #[error("classical divergence: {0}")]
    ClassicalDivergence(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
