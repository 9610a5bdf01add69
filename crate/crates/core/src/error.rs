use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant carries enough context to name the offending input; the CLI
/// maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty operator domain: {0}")]
    EmptyDomain(String),

    #[error("outside validity domain: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}): {context}")]
    Solver {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("potential evaluation failed: {0}")]
    Evaluation(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("problem too large: {0}")]
    Size(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
