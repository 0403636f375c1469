//! Authentication tokens for split providers and revocation requests.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use revfrf_transport::PartyId;

/// Produces tokens on behalf of one party.
pub trait TokenSigner: Send {
    fn sign(&self, message: &[u8]) -> Vec<u8>;
}

/// Checks tokens claimed to come from a party.
pub trait TokenVerifier: Send {
    fn verify(&self, party: PartyId, message: &[u8], token: &[u8]) -> bool;
}

/// Keyed SHA-256 over `key ‖ party ‖ message`. Verification needs the same
/// key, so the verifier is trusted with every signing key; adequate for a
/// simulation where only verifiability matters.
#[derive(Clone)]
pub struct KeyedHashSigner {
    party: PartyId,
    key: [u8; 32],
}

fn digest(key: &[u8; 32], party: PartyId, message: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(key);
    h.update(party.to_be_bytes());
    h.update(message);
    h.finalize().to_vec()
}

impl TokenSigner for KeyedHashSigner {
    fn sign(&self, message: &[u8]) -> Vec<u8> {
        digest(&self.key, self.party, message)
    }
}

#[derive(Clone, Default)]
pub struct KeyedHashVerifier {
    keys: BTreeMap<PartyId, [u8; 32]>,
}

impl KeyedHashVerifier {
    /// Derives one signing key per party from `seed` and returns the
    /// verifier with the signers.
    pub fn issue(seed: u64, parties: &[PartyId]) -> (Self, Vec<KeyedHashSigner>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x746f_6b65_6e73);
        let mut verifier = KeyedHashVerifier::default();
        let mut signers = Vec::new();
        for &party in parties {
            let mut key = [0u8; 32];
            rng.fill_bytes(&mut key);
            verifier.keys.insert(party, key);
            signers.push(KeyedHashSigner { party, key });
        }
        (verifier, signers)
    }

    pub fn forget(&mut self, party: PartyId) {
        self.keys.remove(&party);
    }
}

impl TokenVerifier for KeyedHashVerifier {
    fn verify(&self, party: PartyId, message: &[u8], token: &[u8]) -> bool {
        self.keys.get(&party).is_some_and(|k| digest(k, party, message) == token)
    }
}

pub fn revocation_message(party: PartyId, nonce: u64) -> Vec<u8> {
    let mut m = b"revoke".to_vec();
    m.extend_from_slice(&party.to_be_bytes());
    m.extend_from_slice(&nonce.to_be_bytes());
    m
}

pub fn split_message(party: PartyId, epoch: u32, tree: u32, node: u64) -> Vec<u8> {
    let mut m = b"split".to_vec();
    m.extend_from_slice(&party.to_be_bytes());
    m.extend_from_slice(&epoch.to_be_bytes());
    m.extend_from_slice(&tree.to_be_bytes());
    m.extend_from_slice(&node.to_be_bytes());
    m
}
