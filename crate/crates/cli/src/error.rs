use revfrf_federation::FederationError;
use revfrf_forest::ForestError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error(transparent)]
    Crypto(#[from] revfrf_crypto::CryptoError),
    #[error(transparent)]
    Transport(#[from] revfrf_transport::TransportError),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), message: e.to_string() }
    }

    /// 1 for anything wrong with the inputs, 2 when a protocol run fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } | CliError::Config(_) => 1,
            CliError::Forest(ForestError::InvalidParams(_) | ForestError::Decode(_) | ForestError::Io(_)) => 1,
            CliError::Federation(FederationError::Config(_) | FederationError::Forest(ForestError::InvalidParams(_))) => 1,
            _ => 2,
        }
    }
}
