use std::collections::BTreeSet;

use revfrf_crypto::KeyGenCenter;
use revfrf_transport::{Handler, Outbox, PartyId};

use crate::message::Message;
use crate::{FederationError, Result};

/// The key generation center once keys are out: it only records which
/// participants' keys are revoked.
pub struct KeyCenter {
    keys: KeyGenCenter,
    revoked: BTreeSet<PartyId>,
}

impl KeyCenter {
    pub fn new(keys: KeyGenCenter) -> Self {
        Self { keys, revoked: BTreeSet::new() }
    }

    pub fn revoked(&self) -> &BTreeSet<PartyId> {
        &self.revoked
    }

    /// Test hook: regenerates any party's weak key.
    #[cfg(feature = "escrow")]
    pub fn escrow_key(&self, party: PartyId) -> revfrf_crypto::SecretKey {
        self.keys.weak_key(party)
    }

    pub fn params(&self) -> &revfrf_crypto::PublicParams {
        self.keys.params()
    }
}

impl Handler<Message, FederationError> for KeyCenter {
    fn handle(&mut self, from: PartyId, msg: Message, out: &mut Outbox<Message>) -> Result<()> {
        match msg {
            Message::RevokeKeys { party } => {
                self.revoked.insert(party);
                out.send(from, Message::KeysRevoked { party });
                Ok(())
            }
            other => Err(FederationError::UnexpectedMessage { from, expected: "RevokeKeys", got: other.name() }),
        }
    }
}
