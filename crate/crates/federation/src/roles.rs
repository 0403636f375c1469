use revfrf_transport::PartyId;

/// The center server: holds the labels and λ1, drives every protocol.
pub const CENTER: PartyId = 0;
/// The computation provider: holds λ2.
pub const COMPUTATION: PartyId = 1;
pub const KEY_GENERATION: PartyId = 2;
/// Participants are numbered from here.
pub const FIRST_PARTICIPANT: PartyId = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Center,
    Computation,
    KeyGeneration,
    Participant,
}

impl Role {
    pub fn of(id: PartyId) -> Role {
        match id {
            CENTER => Role::Center,
            COMPUTATION => Role::Computation,
            KEY_GENERATION => Role::KeyGeneration,
            _ => Role::Participant,
        }
    }
}
