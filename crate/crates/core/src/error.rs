use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("scalar encoding is not canonical (value >= group order)")]
    NonCanonicalScalar,

    #[error("invalid {0} point encoding")]
    InvalidPoint(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range for {bound} items")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("matrix is singular")]
    Singular,

    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },

    #[error("frame of {0} bytes exceeds the configured limit")]
    FrameTooLarge(usize),

    #[error("server replied with error {code}: {message}")]
    Remote { code: u8, message: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

pub(crate) fn malformed(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Malformed {
        what,
        reason: reason.into(),
    }
}
