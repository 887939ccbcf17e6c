use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state has length {got}, cost function expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {n_dims} dimensions")]
    IndexOutOfRange { index: usize, n_dims: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },

    /// The asymptotic Gaussian-minimum expressions have no real, positive
    /// solution for this sample count.
    #[error("asymptotics invalid: {0}")]
    AsymptoticsInvalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed {kind}: {msg}")]
    Format { kind: &'static str, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::AsymptoticsInvalid(_) | Error::Domain(_) => 3,
            _ => 1,
        }
    }
}
