//! Error types shared across the crate.

use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An array had the wrong length for the plan or profile it was used with.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Two objects were built against different band profiles.
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    /// A parameter was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArg(String),

    /// A numerical routine broke down (singular kernel, flat objective, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative routine hit its iteration cap.
    #[error("{what} did not converge after {iters} iterations")]
    NotConverged { what: &'static str, iters: usize },

    /// A region of interest contained no voxels.
    #[error("region is empty")]
    EmptyRegion,

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("file format error: {0}")]
    Format(#[from] FormatError),
}

/// Errors raised while decoding the binary ball-file format.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes (not a ball file)")]
    BadMagic,

    #[error("endianness marker mismatch (file was not written little-endian)")]
    Endianness,

    #[error("file holds {found} data but {expected} was expected")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("payload size mismatch: header declares {declared} words, file holds {actual}")]
    SizeMismatch { declared: u64, actual: u64 },

    #[error("unknown kind tag {0}")]
    UnknownKind(u8),

    #[error("header field out of range: {0}")]
    Header(String),
}

impl Error {
    pub fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::ShapeMismatch {
            context,
            expected,
            got,
        }
    }
}
