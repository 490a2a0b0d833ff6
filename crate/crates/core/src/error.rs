use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("window {size}x{size} at ({x},{y}) has no pixel pair at distance {distance}")]
    WindowTooSmall {
        x: u32,
        y: u32,
        size: u32,
        distance: u32,
    },
    #[error("co-occurrence matrix has zero total count")]
    EmptyGlcm,

    #[error("class {0} has no training samples")]
    EmptyClass(u8),
    #[error("need at least two classes with samples, found {0}")]
    TooFewClasses(usize),
    #[error("unknown class id {0}")]
    UnknownClass(u8),
    #[error("class {class} has {count} samples, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: u8,
        count: usize,
        folds: usize,
    },
    #[error("SMO did not converge for class {class} within {sweeps} sweeps")]
    NotConverged { class: u8, sweeps: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
