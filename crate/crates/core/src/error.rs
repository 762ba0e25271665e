use thiserror::Error;

/// Errors raised by the covariance-matrix algebra and the models built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A covariance matrix violates the uncertainty principle.
    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {nu_minus} < 1")]
    Physicality { nu_minus: f64 },

    /// Negative discriminant or other loss of the real domain inside a formula.
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// A function argument lies outside the domain of the quantity it computes.
    #[error("domain error: {0}")]
    Domain(String),

    /// A denominator vanished.
    #[error("division by zero: {0}")]
    Division(String),

    /// A configuration field is out of range.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The two information quantities are undefined for a degenerate state.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// Malformed oracle sample dump.
    #[error("malformed sample dump: {0}")]
    Dump(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
