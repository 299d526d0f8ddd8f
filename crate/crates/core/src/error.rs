use std::path::PathBuf;

use crate::corpus::Label;

/// Errors raised while loading corpora, fitting models, or writing artifacts.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: unknown label {value:?}")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("{path}: missing required column {column:?}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}:{line}: unknown SemEval_set value {value:?}")]
    UnknownSemEvalSet {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("duplicate pair id {0:?}")]
    DuplicateId(String),

    #[error("pair {id:?} has an empty {field}")]
    EmptySentence { id: String, field: &'static str },

    #[error("label {0} does not occur in the training split")]
    MissingLabel(Label),

    #[error("split is empty")]
    EmptySplit,

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown-word symbol {0:?} must tokenize to exactly one token")]
    InvalidUnkSymbol(String),

    #[error("pair id {0:?} cannot be written to a manifest")]
    InvalidManifestId(String),

    #[error("manifest ids do not match the split: {0}")]
    ManifestMismatch(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model is inconsistent: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
