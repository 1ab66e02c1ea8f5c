use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classes used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("missing header row")]
    MissingHeader,
    #[error("duplicate feature name \"{0}\"")]
    DuplicateFeature(String),
    #[error("target column \"{0}\" not found in header")]
    MissingTarget(String),
    #[error("cannot parse \"{value}\" at row {row}, column {column}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("classification label {label} at row {row} outside 0..{n_classes}")]
    LabelOutOfRange {
        row: usize,
        label: String,
        n_classes: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty {0} split")]
    EmptySplit(&'static str),
    #[error("{what} = {value} out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },
    #[error("unknown feature \"{name}\"; available: {}", available.join(", "))]
    UnknownFeature { name: String, available: Vec<String> },
    #[error("unknown label \"{0}\"")]
    UnknownLabel(String),
    #[error("incompatible task: {family} cannot be trained on {task} data")]
    IncompatibleTask { family: String, task: String },
    #[error("importance unsupported for family {0}")]
    ImportanceUnsupported(String),
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("training diverged: {0}")]
    Divergent(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("zero marginal in contingency table ({0})")]
    ZeroMarginal(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("mixed error kinds in one fleet")]
    MixedKinds,
    #[error("method {method} cannot be applied to {kind} errors")]
    MethodConflict { method: String, kind: String },
    #[error("{0}")]
    Fleet(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Divergent(_) | Error::NonFinite(_) => ErrorClass::Numeric,
            Error::InvalidConfig(_) | Error::Hyperparameter(_) | Error::MethodConflict { .. } => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
