//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    ManifestParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate record id `{0}`")]
    DuplicateId(String),

    #[error("augmented record `{id}` references unknown source `{source_id}`")]
    UnknownSource { id: String, source_id: String },

    #[error("record `{0}` already has a split assignment")]
    AlreadySplit(String),

    #[error("train fraction {0} outside (0, 1)")]
    FractionOutOfRange(f64),

    #[error("label string `{0}` is not 7 characters of 0/1")]
    BadLabel(String),

    #[error("failed to decode image {path}: {msg}")]
    ImageDecode { path: PathBuf, msg: String },

    #[error("failed to encode image {path}: {msg}")]
    ImageEncode { path: PathBuf, msg: String },

    #[error("invalid transform parameters: {0}")]
    InvalidTransform(String),

    #[error("class `{class}` needs {needed} augmented samples but has no usable {what}")]
    UnsatisfiablePlan {
        class: &'static str,
        needed: usize,
        what: &'static str,
    },

    #[error("augmentation job {job_index} on source `{source_id}` failed: {msg}")]
    JobFailed {
        job_index: usize,
        source_id: String,
        msg: String,
    },

    #[error("class `{class}` has no samples")]
    EmptyClass { class: &'static str },

    #[error("class `{class}` has no {what} examples")]
    OneSidedClass { class: &'static str, what: &'static str },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },

    #[error("operation not supported for this checkpoint kind: {0}")]
    UnsupportedCheckpoint(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
