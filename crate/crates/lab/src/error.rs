use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a completed run whose acceptance property failed.
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: TOML syntax error: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse { .. } | LabError::Validation { .. } | LabError::Config(_) => EXIT_CONFIG,
            LabError::Io { .. } | LabError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Validation { key: key.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}

impl From<morawetz_core::Error> for LabError {
    fn from(e: morawetz_core::Error) -> Self {
        match e {
            morawetz_core::Error::Config(m) | morawetz_core::Error::Domain(m) => LabError::Config(m),
            other => LabError::Runtime(other.to_string()),
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
