//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of construction, verification and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The requested geometric construction does not exist for the input.
    #[error("construction impossible: {0}")]
    ConstructionImpossible(String),
    /// An input file or mesh is structurally inconsistent.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn impossible(msg: impl Into<String>) -> Error {
    Error::ConstructionImpossible(msg.into())
}

pub(crate) fn bad_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
