use thiserror::Error;

/// Errors raised by the learning engine, environments and evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid configuration `{key}`: {message}")]
    InvalidConfig { key: String, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("linear system is singular; no unique value function exists")]
    Singular,

    #[error("return at t={t} needs {needed} rewards but the tape holds {available}")]
    IncompleteReturn {
        t: usize,
        needed: usize,
        available: usize,
    },

    #[error("invalid policy file: {0}")]
    InvalidPolicyFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
