use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use revfrf_crypto::{ho_enc, par_h_dec1, Ciphertext, FixedPoint, PublicKey, PublicParams, SecretKey};
use revfrf_forest::seed::{self, NodeKey};
use revfrf_forest::{recommend_splits, Hyperparams};
use revfrf_transport::{Handler, Outbox, PartyId, Primitive, Wire};

use crate::message::Message;
use crate::token::{revocation_message, split_message, KeyedHashSigner, TokenSigner};
use crate::{FederationError, Result};

/// A participant's vertical slice: quantized columns it owns, keyed by
/// global feature index, for the training and the test rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParticipantData {
    pub id: PartyId,
    pub train: BTreeMap<usize, Vec<i64>>,
    pub test: BTreeMap<usize, Vec<i64>>,
}

pub struct Participant {
    data: ParticipantData,
    pp: PublicParams,
    sk: SecretKey,
    pk: PublicKey,
    signer: KeyedHashSigner,
    params: Hyperparams,
    seed: u64,
    /// Thresholds proposed at the most recent node, per feature.
    pending: Option<(NodeKey, BTreeMap<usize, Vec<i64>>)>,
    removed: BTreeSet<PartyId>,
    rng: ChaCha20Rng,
    last_result: Option<f64>,
}

impl Participant {
    pub fn new(
        data: ParticipantData,
        pp: PublicParams,
        sk: SecretKey,
        signer: KeyedHashSigner,
        params: Hyperparams,
        seed: u64,
    ) -> Self {
        let pk = sk.public_key(&pp);
        let rng = ChaCha20Rng::seed_from_u64(seed::derive(seed, seed::Purpose::Rows, &[u64::MAX, data.id as u64]));
        Self { data, pp, sk, pk, signer, params, seed, pending: None, removed: BTreeSet::new(), rng, last_result: None }
    }

    pub fn id(&self) -> PartyId {
        self.data.id
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }

    pub fn features(&self) -> impl Iterator<Item = usize> + '_ {
        self.data.train.keys().copied()
    }

    pub fn is_removed(&self) -> bool {
        self.removed.contains(&self.data.id)
    }

    pub fn last_result(&self) -> Option<f64> {
        self.last_result
    }

    fn encrypt_ticks(&mut self, ticks: i64) -> Result<Ciphertext> {
        let raw = FixedPoint::from_ticks(&BigInt::from(ticks), &self.pp)?.into_raw();
        Ok(ho_enc(&self.pp, &self.pk, &raw, &mut self.rng)?)
    }

    /// Encrypts a complete quantized row under this participant's key, as
    /// a prediction requester.
    pub fn encrypt_request(&mut self, row: &[i64]) -> Result<Vec<Ciphertext>> {
        row.iter().map(|&x| self.encrypt_ticks(x)).collect()
    }

    /// A signed request to leave the federation.
    pub fn revocation_request(&self, nonce: u64) -> Message {
        Message::Revoke { nonce, token: self.signer.sign(&revocation_message(self.data.id, nonce)) }
    }

    fn recommend(&mut self, key: NodeKey, mu: &[bool], examined: &[bool]) -> Result<Message> {
        let mut proposed = BTreeMap::new();
        let mut sets = Vec::new();
        for (&feature, column) in &self.data.train {
            if !examined.get(feature).copied().unwrap_or(false) {
                continue;
            }
            let mut rng = seed::feature_range(self.seed, key, feature);
            let (set, vectors) =
                recommend_splits(feature, column, mu, self.params.range_sample, self.params.split_count, &mut rng)?;
            proposed.insert(feature, set.thresholds);
            sets.push((feature as u32, vectors));
        }
        self.pending = Some((key, proposed));
        Ok(Message::SplitVectors { key, sets })
    }

    fn won(&mut self, key: NodeKey, feature: usize, index: usize) -> Result<Message> {
        let threshold = match &self.pending {
            Some((k, proposed)) if *k == key => proposed.get(&feature).and_then(|t| t.get(index)).copied(),
            _ => None,
        }
        .ok_or_else(|| FederationError::Protocol(format!("party {} proposed no candidate {index} for feature {feature}", self.data.id)))?;
        self.pending = None;
        let split = self.encrypt_ticks(threshold)?;
        let token = self.signer.sign(&split_message(self.data.id, key.epoch, key.tree, key.node));
        Ok(Message::WinnerSplit { key, split, token })
    }

    fn test_operands(&mut self, row: usize, feature: usize, split: &Ciphertext, out: &mut Outbox<Message>) -> Result<Message> {
        let x = self
            .data
            .test
            .get(&feature)
            .and_then(|c| c.get(row))
            .copied()
            .ok_or_else(|| FederationError::Protocol(format!("party {} holds no test value ({row}, {feature})", self.data.id)))?;
        let split = par_h_dec1(&self.pp, &self.sk, split)?;
        out.record(Primitive::ParHDec1);
        let value = self.encrypt_ticks(x)?;
        out.record(Primitive::HoEnc);
        Ok(Message::TestOperands { split, value })
    }
}

impl Handler<Message, FederationError> for Participant {
    fn handle(&mut self, from: PartyId, msg: Message, out: &mut Outbox<Message>) -> Result<()> {
        if let Message::Removal { party } = msg {
            self.removed.insert(party);
            return Ok(());
        }
        if let Message::PredictResult { value } = msg {
            self.last_result = Some(value);
            return Ok(());
        }
        if self.is_removed() {
            out.send(from, Message::Refused { tag: msg.tag() });
            return Ok(());
        }
        let reply = match msg {
            Message::Recommend { key, mu, features } => self.recommend(key, &mu, &features)?,
            Message::WinnerRequest { key, feature, index } => {
                let reply = self.won(key, feature as usize, index as usize)?;
                out.record(Primitive::HoEnc);
                reply
            }
            Message::RouteBit { requester, bit } => {
                if self.removed.contains(&requester) {
                    Message::Refused { tag: 9 }
                } else {
                    let partial = par_h_dec1(&self.pp, &self.sk, &bit)?;
                    out.record(Primitive::ParHDec1);
                    Message::RouteBitPartial(partial)
                }
            }
            Message::TestSplit { row, feature, split } => self.test_operands(row as usize, feature as usize, &split, out)?,
            other => {
                return Err(FederationError::UnexpectedMessage { from, expected: "a participant request", got: other.name() })
            }
        };
        out.send(from, reply);
        Ok(())
    }
}
