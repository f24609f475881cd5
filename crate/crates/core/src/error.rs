use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown channel output symbol {0}")]
    UnknownSymbol(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("depth {depth} exceeds code horizon {horizon}")]
    HorizonExceeded { depth: usize, horizon: usize },

    #[error("instance too large for exhaustive search: {0} message bits")]
    InstanceTooLarge(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
