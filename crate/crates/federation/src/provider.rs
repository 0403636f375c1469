use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use revfrf_crypto::{ho_add_respond, ho_enc_ref, lt_decide, CcShare, KeyDomain, PublicKey, PublicParams};
use revfrf_transport::{Handler, Outbox, PartyId, Primitive, Wire};

use crate::message::Message;
use crate::{FederationError, Result};

/// The computation provider: completes strong decryptions with λ2 and
/// refreshes destroyed splits.
pub struct ComputationProvider {
    pp: PublicParams,
    share: CcShare,
    directory: BTreeMap<PartyId, PublicKey>,
    rng: ChaCha20Rng,
}

impl ComputationProvider {
    pub fn new(pp: PublicParams, share: CcShare, directory: BTreeMap<PartyId, PublicKey>, seed: u64) -> Self {
        Self { pp, share, directory, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// The public key of a single or joint domain, if every part is known.
    fn resolve(&self, domain: KeyDomain) -> Option<PublicKey> {
        match domain {
            KeyDomain::Single(a) => self.directory.get(&a).cloned(),
            KeyDomain::Joint(a, b) => {
                PublicKey::combine(&self.pp, self.directory.get(&a)?, self.directory.get(&b)?).ok()
            }
            KeyDomain::Refreshed(_) => None,
        }
    }

    pub fn knows(&self, party: PartyId) -> bool {
        self.directory.contains_key(&party)
    }
}

impl Handler<Message, FederationError> for ComputationProvider {
    fn handle(&mut self, from: PartyId, msg: Message, out: &mut Outbox<Message>) -> Result<()> {
        let tag = msg.tag();
        match msg {
            Message::AddRequest(req) => match self.resolve(req.target) {
                Some(pk) => out.send(from, Message::AddReply(ho_add_respond(&self.pp, &self.share, &req, &pk, &mut self.rng)?)),
                None => out.send(from, Message::Refused { tag }),
            },
            Message::Compare(req) => match self.resolve(req.target) {
                Some(pk) => out.send(from, Message::CompareReply(lt_decide(&self.pp, &self.share, &req, &pk, &mut self.rng)?)),
                None => out.send(from, Message::Refused { tag }),
            },
            Message::Refresh(cts) => {
                let one = BigUint::from(1u32);
                let refreshed = cts
                    .iter()
                    .map(|ct| {
                        let r_d = self.rng.gen_biguint_range(&one, self.pp.n());
                        ho_enc_ref(&self.pp, &r_d, ct)
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                out.record_n(Primitive::HEncRef, refreshed.len() as u64);
                out.send(from, Message::Refreshed(refreshed));
            }
            Message::Removal { party } => {
                self.directory.remove(&party);
            }
            other => {
                return Err(FederationError::UnexpectedMessage { from, expected: "a computation request", got: other.name() })
            }
        }
        Ok(())
    }
}
