use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two estimates that must be ordered came out in the wrong order.
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    /// A one-sided limit did not settle along its schedule.
    #[error("no one-sided limit: {0}")]
    Divergence(String),
    /// Iterative refinement stopped at its depth limit before meeting tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    /// ODE state became non-finite.
    #[error("integration blew up at t = {t}: {what}")]
    BlowUp { t: f64, what: String },
    /// A request the inputs do not support (e.g. two-sided derivative of an endpoint-discontinuous control).
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
