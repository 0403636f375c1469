use crate::PartyId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("no party registered with id {0}")]
    UnknownParty(PartyId),
    #[error("party {0} registered twice")]
    DuplicateParty(PartyId),
    #[error("message tag {tag:#04x} may not travel from {from} to {to}")]
    RouteForbidden { tag: u8, from: PartyId, to: PartyId },
    #[error("malformed frame: {0}")]
    Decode(String),
    #[error("bus did not go quiet within {0} rounds")]
    NoQuiescence(usize),
    #[error("csv export failed: {0}")]
    Export(String),
}
