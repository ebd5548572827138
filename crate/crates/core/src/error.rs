use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Input,
    Numerical,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Input => 3,
            ErrorCategory::Numerical => 4,
            ErrorCategory::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Input => "input",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error in {path}: missing mandatory column `{column}`")]
    Schema { path: String, column: String },

    #[error("parse error in {path}, row {row}, column `{column}`: cannot parse {value:?}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("empty-input: {0}")]
    EmptyInput(String),

    #[error("conflict: duplicate record key {0}")]
    Conflict(String),

    #[error("range violation: {0}")]
    Range(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => ErrorCategory::Config,
            Error::Schema { .. }
            | Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::Conflict(_)
            | Error::Range(_)
            | Error::Csv(_) => ErrorCategory::Input,
            Error::InsufficientData(_)
            | Error::DimensionMismatch { .. }
            | Error::NonFinite(_)
            | Error::UndefinedScore(_) => ErrorCategory::Numerical,
            Error::Io { .. } | Error::Json(_) => ErrorCategory::Io,
        }
    }
}
