use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} has no square root in {1}")]
    NoSquareRoot(String, String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Domain(String),
    #[error("formula is not integral: {0}")]
    NonIntegral(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
