use thiserror::Error;

/// Error taxonomy shared by every subsystem.
///
/// `Validation` marks bad *input data* (the CLI maps it to exit code 2);
/// `Structural` marks incompatible objects handed to an operation;
/// `Computation` marks a numerical pipeline that ran but failed its own
/// internal checks (exit code 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("structural: {0}")]
    Structural(String),
    #[error("computation: {0}")]
    Computation(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn computation(msg: impl Into<String>) -> Self {
        Error::Computation(msg.into())
    }
}
