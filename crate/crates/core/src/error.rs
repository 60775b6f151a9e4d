use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input (bad map value, size mismatch, parameter order).
    #[error("invalid input: {0}")]
    Input(String),
    /// Request exceeds a configured size guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Argument outside the domain where a numeric function is defined.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
