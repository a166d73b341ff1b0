use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped so that front ends can tell bad invocations,
/// bad data and runtime failures apart (see [`Error::category`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: row {row}, column '{column}': non-numeric cell '{value}'")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown target '{0}'")]
    UnknownTarget(String),

    #[error("column '{0}' not found")]
    MissingColumn(String),

    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),

    #[error("empty table: {0}")]
    EmptyTable(String),

    #[error("empty test set")]
    EmptyTestSet,

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("column '{0}' is constant")]
    ConstantColumn(String),

    #[error("training failed for target {target}: {source}")]
    Target {
        target: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid entry {entry} failed: {message}")]
    GridEntry { entry: String, message: String },

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error("corrupted model: {0}")]
    CorruptedModel(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

/// Coarse classification of an [`Error`], used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Runtime,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub fn for_target(self, target: usize) -> Self {
        match self {
            e @ Error::Target { .. } => e,
            e => Error::Target {
                target,
                source: Box::new(e),
            },
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter(_) => ErrorCategory::Usage,
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::NonNumeric { .. }
            | Error::UnknownTarget(_)
            | Error::DuplicateColumn(_)
            | Error::MissingColumn(_)
            | Error::EmptyTable(_)
            | Error::EmptyTestSet
            | Error::ShapeMismatch { .. }
            | Error::ConstantColumn(_)
            | Error::CorruptedModel(_) => ErrorCategory::Data,
            Error::Target { source, .. } => source.category(),
            Error::Serialization(_) | Error::Locked(_) | Error::GridEntry { .. } => ErrorCategory::Runtime,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
