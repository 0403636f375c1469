#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("malformed forest file: {0}")]
    Decode(String),
    #[error("no trees to evaluate")]
    EmptyForest,
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep the message.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for ForestError {
    fn from(e: std::io::Error) -> Self {
        ForestError::Io(IoError(e.to_string()))
    }
}

impl From<revfrf_crypto::CryptoError> for ForestError {
    fn from(e: revfrf_crypto::CryptoError) -> Self {
        ForestError::Decode(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ForestError>;
