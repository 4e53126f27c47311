use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("routing error: {0}")]
    Routing(String),

    #[error("unphysical channel: {0}")]
    Physicality(String),

    #[error("fit undefined: {0}")]
    FitUndefined(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
