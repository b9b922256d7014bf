use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called with an argument outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A simulation configuration violates a model invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A configuration document failed to parse or validate.
    #[error("config error at line {line}, key `{key}`: {message}")]
    ConfigParse {
        key: String,
        line: usize,
        message: String,
    },

    /// A realization contains no gateways; the trial counts as a failure.
    #[error("realization contains no gateways")]
    NoGateway,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
