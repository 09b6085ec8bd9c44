use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("{op}: domain error: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Adaptive quadrature exhausted its evaluation budget before reaching the tolerance.
    #[error(
        "quadrature did not converge: estimate {error_estimate:.3e} > tol {tol:.3e} after {evaluations} evaluations"
    )]
    Convergence {
        error_estimate: f64,
        tol: f64,
        evaluations: usize,
    },

    /// A documented precondition of an operation does not hold.
    #[error("{op}: precondition violated: {reason}")]
    Precondition { op: &'static str, reason: String },

    /// Grid densities that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        op,
        reason: reason.into(),
    }
}

pub(crate) fn precondition(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Precondition {
        op,
        reason: reason.into(),
    }
}
