use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance is too large for exhaustive work under the configured ceiling.
    #[error("resource guard: {what} needs about {needed} units of work, ceiling is {ceiling}")]
    Resource {
        what: &'static str,
        needed: String,
        ceiling: u64,
    },

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
