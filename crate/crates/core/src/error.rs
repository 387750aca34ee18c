use std::fmt;

/// Errors produced by the distance-field toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The set a distance is measured to has no cells.
    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input violates an operation's contract (zero cell before dithering,
    /// reinitialization input that does not represent the reference set).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure at iteration {iteration}: {message}")]
    NumericalFailure { iteration: usize, message: String },

    #[error("empty band: {0}")]
    EmptyBand(String),
}

impl Error {
    /// Stable short name used by the CLI diagnostics and the C ABI.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::InvalidArgument,
            Error::EmptySet(_) => ErrorKind::EmptySet,
            Error::Format { .. } => ErrorKind::Format,
            Error::Io(_) => ErrorKind::Io,
            Error::InvalidInput(_) => ErrorKind::InvalidInput,
            Error::NumericalFailure { .. } => ErrorKind::NumericalFailure,
            Error::EmptyBand(_) => ErrorKind::EmptyBand,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    InvalidArgument,
    EmptySet,
    Format,
    Io,
    InvalidInput,
    NumericalFailure,
    EmptyBand,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::InvalidArgument => "invalid-argument",
            ErrorKind::EmptySet => "empty-set",
            ErrorKind::Format => "format-error",
            ErrorKind::Io => "io-error",
            ErrorKind::InvalidInput => "invalid-input",
            ErrorKind::NumericalFailure => "numerical-failure",
            ErrorKind::EmptyBand => "empty-band",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
