use thiserror::Error;

/// Failure categories shared by every solver and diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An explicit scheme was asked to step beyond its stability limit.
    #[error("stability error: {0}")]
    Stability(String),
    /// A mathematical invariant of an intermediate result was violated.
    #[error("internal error: {0}")]
    Internal(String),
    /// The input does not provide a required capability.
    #[error("capability error: {0}")]
    Capability(String),
    /// An iterative search failed to settle.
    #[error("nonconvergence: {0}")]
    Nonconvergence(String),
    /// A configuration document is malformed or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
