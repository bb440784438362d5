use thiserror::Error;

/// Errors raised by the engine. The variants map onto the CLI exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("numerical failure: {message} (achieved error {achieved:.3e})")]
    Numerical { message: String, achieved: f64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            achieved,
        }
    }

    /// Process exit code used by the driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Io(_) => 1,
            Error::Verification(_) => 2,
            Error::Singular(_) | Error::Numerical { .. } | Error::Resource(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
