use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice must be at least 2x2, got {width}x{height}")]
    InvalidGeometry { width: usize, height: usize },

    #[error("{kind} index {index} out of range (registry size {len})")]
    IndexOutOfRange { kind: &'static str, index: usize, len: usize },

    #[error("cannot measure the identity")]
    IdentityObservable,

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("generators are not a valid pure stabilizer state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
