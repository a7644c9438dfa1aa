use thiserror::Error;

/// Errors raised by the arithmetic and analysis layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Not enough significant digits remain to decide the requested quantity.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
    /// A self-check on a constructed object failed. Indicates an internal bug.
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn precision(context: impl Into<String>) -> Self {
        Error::PrecisionExhausted(context.into())
    }

    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
