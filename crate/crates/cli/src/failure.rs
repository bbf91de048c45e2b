use pnp_restore::solver::RunError;
use pnp_restore::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DENOISER: u8 = 4;
pub const EXIT_NUMERIC: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{context}: {err}"),
        }
    }

    pub fn context(mut self, what: impl std::fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ShapeMismatch(_) | Error::InvalidArgument(_) => EXIT_USAGE,
        Error::PngDecode(_)
        | Error::PngEncode(_)
        | Error::UnsupportedPng(_)
        | Error::KernelFormat(_)
        | Error::Io(_) => EXIT_IO,
        Error::Denoiser { .. } => EXIT_DENOISER,
        Error::NonFinite(_) => EXIT_NUMERIC,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(err: RunError) -> Self {
        Self {
            code: exit_code(&err.source),
            message: err.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;
