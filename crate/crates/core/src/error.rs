use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    /// API misuse, e.g. a backward pass against a stale forward cache.
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
