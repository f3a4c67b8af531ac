use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: not a feature file")]
    NotAFeatureFile { path: PathBuf },

    #[error("{path}: corrupt length (expected {expected} payload bytes, found {found})")]
    CorruptLength {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: version mismatch (found {found}, supported {supported})")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        supported: u32,
    },

    #[error("non-finite value at frame {frame}, dim {dim}")]
    NonFinite { frame: usize, dim: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dims mismatch: {first} has {first_dims} dims but {second} has {second_dims}")]
    DimsMismatch {
        first: PathBuf,
        first_dims: usize,
        second: PathBuf,
        second_dims: usize,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("invalid manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate sequence: {0}")]
    DegenerateSequence(&'static str),

    #[error("insufficient voiced overlap: {found} common voiced frames, need {required}")]
    InsufficientVoicedOverlap { found: usize, required: usize },

    #[error("original matrix has no diagonal dominance")]
    NoDiagonalDominance,

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
