use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input bytes do not follow the expected container layout.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed input using a codec or layout this crate does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("root finding did not converge{}", frame.map(|f| format!(" (frame {f})")).unwrap_or_default())]
    RootFinding { frame: Option<usize> },

    #[error("weight file error in tensor `{tensor}`: {reason}")]
    WeightFormat { tensor: String, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
