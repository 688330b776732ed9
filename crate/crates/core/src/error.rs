use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the constructions, estimators and pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the precondition of the operation that owns it.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("point ({x}, {y}) lies outside the patch [-1/10, 1/10]^2")]
    OutsidePatch { x: f64, y: f64 },

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("dimension mismatch: expected d = {expected}, got d = {actual}")]
    DimensionMismatch { expected: u8, actual: u8 },

    /// Fewer than three scales carried a positive value.
    #[error("log-log fit needs at least 3 usable scales, got {usable}")]
    InsufficientScales { usable: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("acceptance check failed: {0}")]
    AcceptanceFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 = acceptance-check failure, 2 = validation, 3 = resource/I-O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AcceptanceFailed(_) => 1,
            Error::Io { .. } | Error::ResourceLimit(_) => 3,
            _ => 2,
        }
    }
}
