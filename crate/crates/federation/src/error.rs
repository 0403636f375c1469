use revfrf_crypto::CryptoError;
use revfrf_forest::ForestError;
use revfrf_transport::{PartyId, TransportError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FederationError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("expected {expected} from party {from}, got nothing")]
    MissingReply { from: PartyId, expected: &'static str },
    #[error("party {from} sent {got} where {expected} was expected")]
    UnexpectedMessage { from: PartyId, expected: &'static str, got: &'static str },
    #[error("party {0} refused the request")]
    Refused(PartyId),
    #[error("revocation request from party {0} carries an invalid token")]
    InvalidToken(PartyId),
    #[error("party {0} is not an active participant")]
    NotParticipant(PartyId),
    #[error("prediction request has {got} features, the forest needs {expected}")]
    IncompleteRequest { expected: usize, got: usize },
    #[error("test row {row} out of range ({rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("no forest has been trained")]
    NoForest,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, FederationError>;
