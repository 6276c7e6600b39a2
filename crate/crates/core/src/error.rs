use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit position {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vertex {vertex} out of range for vertex bound {bound}")]
    VertexOutOfRange { vertex: u64, bound: u64 },

    #[error("arity {0} is not supported (expected 2..=255)")]
    InvalidArity(usize),

    #[error("cannot combine trees of arity {left} and {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("matrix side k^h exceeds 2^64 for vertex bound {0}")]
    BoundTooLarge(u64),

    #[error("epsilon {0} outside (0, 2] or yields more than 255 slots")]
    InvalidEpsilon(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Maps a short read to a format error; other I/O failures pass through.
    pub(crate) fn from_read(err: io::Error) -> Self {
        if err.kind() == io::ErrorKind::UnexpectedEof {
            Error::format("truncated input")
        } else {
            Error::Io(err)
        }
    }
}
