use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Phase of an external denoiser exchange that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Spawn,
    WriteRequest,
    ReadResponse,
    Protocol,
    Timeout,
    Remote,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Spawn => "spawn",
            Phase::WriteRequest => "write-request",
            Phase::ReadResponse => "read-response",
            Phase::Protocol => "protocol",
            Phase::Timeout => "timeout",
            Phase::Remote => "remote",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("png decode failed: {0}")]
    PngDecode(String),

    #[error("png encode failed: {0}")]
    PngEncode(String),

    #[error("unsupported png: {0}")]
    UnsupportedPng(String),

    #[error("kernel file: {0}")]
    KernelFormat(String),

    #[error("external denoiser failed during {phase}: {message}")]
    Denoiser { phase: Phase, message: String },

    #[error("non-finite values detected in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn denoiser(phase: Phase, msg: impl Into<String>) -> Self {
        Error::Denoiser {
            phase,
            message: msg.into(),
        }
    }
}
