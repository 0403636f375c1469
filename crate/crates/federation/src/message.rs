//! Protocol messages, their wire encoding, and the schema of who may send
//! what to whom.

use revfrf_crypto::wire::{put_bytes, put_f64, put_u16, put_u32, put_u64, put_u8, Reader};
use revfrf_crypto::{Ciphertext, CompareRequest, CryptoError, HoAddRequest};
use revfrf_forest::seed::NodeKey;
use revfrf_forest::{pack_bits, pack_trits, unpack_bits, unpack_trits};
use revfrf_transport::{PartyId, TransportError, Wire};

use crate::roles::Role;

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// Rows reaching a node (`mu`) and the features examined there (`v`),
    /// both over the full row and feature index spaces.
    Recommend { key: NodeKey, mu: Vec<bool>, features: Vec<bool> },
    /// One list of split vectors per examined feature the sender owns, in
    /// ascending feature order.
    SplitVectors { key: NodeKey, sets: Vec<(u32, Vec<Vec<i8>>)> },
    /// Asks the owner of the winning candidate for its encrypted threshold.
    WinnerRequest { key: NodeKey, feature: u32, index: u32 },
    WinnerSplit { key: NodeKey, split: Ciphertext, token: Vec<u8> },
    AddRequest(HoAddRequest),
    AddReply(Ciphertext),
    Compare(CompareRequest),
    CompareReply(Ciphertext),
    /// A comparison bit under `pk_CS + pk_provider`, for the provider to
    /// strip its key from.
    RouteBit { requester: PartyId, bit: Ciphertext },
    RouteBitPartial(Ciphertext),
    /// Every feature of one row, encrypted under the requester's key.
    PredictRequest { features: Vec<Ciphertext> },
    PredictResult { value: f64 },
    /// A stored split re-encrypted toward its provider, with the test row
    /// whose value it is compared against.
    TestSplit { row: u32, feature: u32, split: Ciphertext },
    /// The split under `pk_CS` and the provider's encrypted local value.
    TestOperands { split: Ciphertext, value: Ciphertext },
    Revoke { nonce: u64, token: Vec<u8> },
    Refresh(Vec<Ciphertext>),
    Refreshed(Vec<Ciphertext>),
    RevokeKeys { party: PartyId },
    KeysRevoked { party: PartyId },
    /// Published by the center server once a participant is gone.
    Removal { party: PartyId },
    Refused { tag: u8 },
}

/// The kinds of value a payload is made of; used to audit what each edge
/// can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    NodeKey,
    SelectionBits,
    SplitTrits,
    Index,
    Ciphertext,
    StrongPartial,
    Token,
    Party,
    Nonce,
    /// A plaintext real number.
    Real,
}

#[derive(Debug, Clone, Copy)]
pub struct MessageSchema {
    pub tag: u8,
    pub name: &'static str,
    pub from: &'static [Role],
    pub to: &'static [Role],
    pub fields: &'static [Field],
}

use Field as F;
use Role as R;

pub const SCHEMA: &[MessageSchema] = &[
    MessageSchema { tag: 1, name: "Recommend", from: &[R::Center], to: &[R::Participant], fields: &[F::NodeKey, F::SelectionBits, F::SelectionBits] },
    MessageSchema { tag: 2, name: "SplitVectors", from: &[R::Participant], to: &[R::Center], fields: &[F::NodeKey, F::Index, F::SplitTrits] },
    MessageSchema { tag: 3, name: "WinnerRequest", from: &[R::Center], to: &[R::Participant], fields: &[F::NodeKey, F::Index, F::Index] },
    MessageSchema { tag: 4, name: "WinnerSplit", from: &[R::Participant], to: &[R::Center], fields: &[F::NodeKey, F::Ciphertext, F::Token] },
    MessageSchema { tag: 5, name: "AddRequest", from: &[R::Center], to: &[R::Computation], fields: &[F::StrongPartial, F::StrongPartial] },
    MessageSchema { tag: 6, name: "AddReply", from: &[R::Computation], to: &[R::Center], fields: &[F::Ciphertext] },
    MessageSchema { tag: 7, name: "Compare", from: &[R::Center], to: &[R::Computation], fields: &[F::StrongPartial] },
    MessageSchema { tag: 8, name: "CompareReply", from: &[R::Computation], to: &[R::Center], fields: &[F::Ciphertext] },
    MessageSchema { tag: 9, name: "RouteBit", from: &[R::Center], to: &[R::Participant], fields: &[F::Party, F::Ciphertext] },
    MessageSchema { tag: 10, name: "RouteBitPartial", from: &[R::Participant], to: &[R::Center], fields: &[F::Ciphertext] },
    MessageSchema { tag: 11, name: "PredictRequest", from: &[R::Participant], to: &[R::Center], fields: &[F::Ciphertext] },
    MessageSchema { tag: 12, name: "PredictResult", from: &[R::Center], to: &[R::Participant], fields: &[F::Real] },
    MessageSchema { tag: 13, name: "TestSplit", from: &[R::Center], to: &[R::Participant], fields: &[F::Index, F::Index, F::Ciphertext] },
    MessageSchema { tag: 14, name: "TestOperands", from: &[R::Participant], to: &[R::Center], fields: &[F::Ciphertext, F::Ciphertext] },
    MessageSchema { tag: 15, name: "Revoke", from: &[R::Participant], to: &[R::Center], fields: &[F::Nonce, F::Token] },
    MessageSchema { tag: 16, name: "Refresh", from: &[R::Center], to: &[R::Computation], fields: &[F::Ciphertext] },
    MessageSchema { tag: 17, name: "Refreshed", from: &[R::Computation], to: &[R::Center], fields: &[F::Ciphertext] },
    MessageSchema { tag: 18, name: "RevokeKeys", from: &[R::Center], to: &[R::KeyGeneration], fields: &[F::Party] },
    MessageSchema { tag: 19, name: "KeysRevoked", from: &[R::KeyGeneration], to: &[R::Center], fields: &[F::Party] },
    MessageSchema { tag: 20, name: "Removal", from: &[R::Center], to: &[R::Computation, R::Participant], fields: &[F::Party] },
    MessageSchema { tag: 21, name: "Refused", from: &[R::Computation, R::Participant], to: &[R::Center], fields: &[F::Index] },
];

pub fn schema(tag: u8) -> Option<&'static MessageSchema> {
    SCHEMA.iter().find(|s| s.tag == tag)
}

impl Message {
    pub fn name(&self) -> &'static str {
        schema(self.tag()).map_or("?", |s| s.name)
    }
}

fn put_key(out: &mut Vec<u8>, key: &NodeKey) {
    put_u32(out, key.epoch);
    put_u32(out, key.tree);
    put_u64(out, key.node);
}

fn read_key(r: &mut Reader<'_>) -> Result<NodeKey, CryptoError> {
    Ok(NodeKey { epoch: r.u32()?, tree: r.u32()?, node: r.u64()? })
}

fn put_bits(out: &mut Vec<u8>, bits: &[bool]) {
    put_u32(out, bits.len() as u32);
    out.extend_from_slice(&pack_bits(bits));
}

fn read_bits(r: &mut Reader<'_>) -> Result<Vec<bool>, TransportError> {
    let len = r.u32().map_err(decode_err)? as usize;
    let bytes = r.take(len.div_ceil(8)).map_err(decode_err)?;
    unpack_bits(bytes, len).map_err(|e| TransportError::Decode(e.to_string()))
}

fn put_cts(out: &mut Vec<u8>, cts: &[Ciphertext]) {
    put_u32(out, cts.len() as u32);
    for ct in cts {
        ct.encode(out);
    }
}

fn read_cts(r: &mut Reader<'_>) -> Result<Vec<Ciphertext>, CryptoError> {
    let n = r.u32()? as usize;
    // Each ciphertext takes well over one byte; reject absurd counts early.
    if n > r.remaining() {
        return Err(CryptoError::Decode(format!("{n} ciphertexts cannot fit in {} bytes", r.remaining())));
    }
    (0..n).map(|_| Ciphertext::decode(r)).collect()
}

fn decode_err(e: CryptoError) -> TransportError {
    TransportError::Decode(e.to_string())
}

impl Wire for Message {
    fn tag(&self) -> u8 {
        match self {
            Message::Recommend { .. } => 1,
            Message::SplitVectors { .. } => 2,
            Message::WinnerRequest { .. } => 3,
            Message::WinnerSplit { .. } => 4,
            Message::AddRequest(_) => 5,
            Message::AddReply(_) => 6,
            Message::Compare(_) => 7,
            Message::CompareReply(_) => 8,
            Message::RouteBit { .. } => 9,
            Message::RouteBitPartial(_) => 10,
            Message::PredictRequest { .. } => 11,
            Message::PredictResult { .. } => 12,
            Message::TestSplit { .. } => 13,
            Message::TestOperands { .. } => 14,
            Message::Revoke { .. } => 15,
            Message::Refresh(_) => 16,
            Message::Refreshed(_) => 17,
            Message::RevokeKeys { .. } => 18,
            Message::KeysRevoked { .. } => 19,
            Message::Removal { .. } => 20,
            Message::Refused { .. } => 21,
        }
    }

    fn encode_payload(&self, out: &mut Vec<u8>) {
        match self {
            Message::Recommend { key, mu, features } => {
                put_key(out, key);
                put_bits(out, mu);
                put_bits(out, features);
            }
            Message::SplitVectors { key, sets } => {
                put_key(out, key);
                put_u32(out, sets.len() as u32);
                for (feature, vectors) in sets {
                    put_u32(out, *feature);
                    put_u32(out, vectors.len() as u32);
                    let len = vectors.first().map_or(0, Vec::len);
                    put_u32(out, len as u32);
                    for w in vectors {
                        out.extend_from_slice(&pack_trits(w));
                    }
                }
            }
            Message::WinnerRequest { key, feature, index } => {
                put_key(out, key);
                put_u32(out, *feature);
                put_u32(out, *index);
            }
            Message::WinnerSplit { key, split, token } => {
                put_key(out, key);
                split.encode(out);
                put_bytes(out, token);
            }
            Message::AddRequest(req) => req.encode(out),
            Message::Compare(req) => req.encode(out),
            Message::AddReply(ct) | Message::CompareReply(ct) | Message::RouteBitPartial(ct) => ct.encode(out),
            Message::RouteBit { requester, bit } => {
                put_u16(out, *requester);
                bit.encode(out);
            }
            Message::PredictRequest { features } => put_cts(out, features),
            Message::PredictResult { value } => put_f64(out, *value),
            Message::TestSplit { row, feature, split } => {
                put_u32(out, *row);
                put_u32(out, *feature);
                split.encode(out);
            }
            Message::TestOperands { split, value } => {
                split.encode(out);
                value.encode(out);
            }
            Message::Revoke { nonce, token } => {
                put_u64(out, *nonce);
                put_bytes(out, token);
            }
            Message::Refresh(cts) | Message::Refreshed(cts) => put_cts(out, cts),
            Message::RevokeKeys { party } | Message::KeysRevoked { party } | Message::Removal { party } => {
                put_u16(out, *party)
            }
            Message::Refused { tag } => put_u8(out, *tag),
        }
    }

    fn decode_payload(tag: u8, payload: &[u8]) -> Result<Self, TransportError> {
        let mut r = Reader::new(payload);
        let r = &mut r;
        let msg = match tag {
            1 => Message::Recommend { key: read_key(r).map_err(decode_err)?, mu: read_bits(r)?, features: read_bits(r)? },
            2 => {
                let key = read_key(r).map_err(decode_err)?;
                let n = r.u32().map_err(decode_err)? as usize;
                let mut sets = Vec::new();
                for _ in 0..n {
                    let feature = r.u32().map_err(decode_err)?;
                    let count = r.u32().map_err(decode_err)? as usize;
                    let len = r.u32().map_err(decode_err)? as usize;
                    let mut vectors = Vec::new();
                    for _ in 0..count {
                        let bytes = r.take(len.div_ceil(4)).map_err(decode_err)?;
                        vectors.push(unpack_trits(bytes, len).map_err(|e| TransportError::Decode(e.to_string()))?);
                    }
                    sets.push((feature, vectors));
                }
                Message::SplitVectors { key, sets }
            }
            3 => Message::WinnerRequest {
                key: read_key(r).map_err(decode_err)?,
                feature: r.u32().map_err(decode_err)?,
                index: r.u32().map_err(decode_err)?,
            },
            4 => Message::WinnerSplit {
                key: read_key(r).map_err(decode_err)?,
                split: Ciphertext::decode(r).map_err(decode_err)?,
                token: r.bytes().map_err(decode_err)?.to_vec(),
            },
            5 => Message::AddRequest(HoAddRequest::decode(r).map_err(decode_err)?),
            6 => Message::AddReply(Ciphertext::decode(r).map_err(decode_err)?),
            7 => Message::Compare(CompareRequest::decode(r).map_err(decode_err)?),
            8 => Message::CompareReply(Ciphertext::decode(r).map_err(decode_err)?),
            9 => Message::RouteBit {
                requester: r.u16().map_err(decode_err)?,
                bit: Ciphertext::decode(r).map_err(decode_err)?,
            },
            10 => Message::RouteBitPartial(Ciphertext::decode(r).map_err(decode_err)?),
            11 => Message::PredictRequest { features: read_cts(r).map_err(decode_err)? },
            12 => Message::PredictResult { value: r.f64().map_err(decode_err)? },
            13 => Message::TestSplit {
                row: r.u32().map_err(decode_err)?,
                feature: r.u32().map_err(decode_err)?,
                split: Ciphertext::decode(r).map_err(decode_err)?,
            },
            14 => Message::TestOperands {
                split: Ciphertext::decode(r).map_err(decode_err)?,
                value: Ciphertext::decode(r).map_err(decode_err)?,
            },
            15 => Message::Revoke { nonce: r.u64().map_err(decode_err)?, token: r.bytes().map_err(decode_err)?.to_vec() },
            16 => Message::Refresh(read_cts(r).map_err(decode_err)?),
            17 => Message::Refreshed(read_cts(r).map_err(decode_err)?),
            18 => Message::RevokeKeys { party: r.u16().map_err(decode_err)? },
            19 => Message::KeysRevoked { party: r.u16().map_err(decode_err)? },
            20 => Message::Removal { party: r.u16().map_err(decode_err)? },
            21 => Message::Refused { tag: r.u8().map_err(decode_err)? },
            t => return Err(TransportError::Decode(format!("unknown message tag {t}"))),
        };
        r.finish().map_err(decode_err)?;
        Ok(msg)
    }

    fn route_allowed(&self, from: PartyId, to: PartyId) -> bool {
        schema(self.tag()).is_some_and(|s| s.from.contains(&Role::of(from)) && s.to.contains(&Role::of(to)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use revfrf_crypto::KeyDomain;
    use revfrf_transport::bus::{decode_frame, encode_frame};

    fn ct(x: u32) -> Ciphertext {
        Ciphertext::new(BigUint::from(x), BigUint::from(x + 1), KeyDomain::Single(4))
    }

    fn samples() -> Vec<Message> {
        let key = NodeKey { epoch: 2, tree: 7, node: 13 };
        vec![
            Message::Recommend { key, mu: vec![true, false, true], features: vec![false, true] },
            Message::SplitVectors { key, sets: vec![(1, vec![vec![1, -1, 0], vec![-1, -1, 0]]), (4, vec![])] },
            Message::WinnerRequest { key, feature: 3, index: 9 },
            Message::WinnerSplit { key, split: ct(5), token: vec![1, 2, 3] },
            Message::AddReply(ct(6)),
            Message::RouteBit { requester: 5, bit: ct(7) },
            Message::PredictRequest { features: vec![ct(1), ct(2)] },
            Message::PredictResult { value: -2.5 },
            Message::TestSplit { row: 4, feature: 1, split: ct(3) },
            Message::TestOperands { split: ct(8), value: ct(9) },
            Message::Revoke { nonce: 77, token: vec![9; 32] },
            Message::Refresh(vec![ct(10)]),
            Message::Removal { party: 6 },
            Message::Refused { tag: 1 },
        ]
    }

    #[test]
    fn every_message_roundtrips() {
        for m in samples() {
            let bytes = encode_frame(0, 3, &m);
            let (_, _, back) = decode_frame::<Message>(&bytes).unwrap();
            assert_eq!(back, m, "{}", m.name());
        }
    }

    #[test]
    fn every_tag_has_a_schema_row() {
        for m in samples() {
            assert!(schema(m.tag()).is_some());
        }
        let mut tags: Vec<u8> = SCHEMA.iter().map(|s| s.tag).collect();
        tags.dedup();
        assert_eq!(tags.len(), SCHEMA.len());
    }

    #[test]
    fn routes_follow_roles() {
        let rec = Message::Recommend { key: NodeKey::root(0, 0), mu: vec![], features: vec![] };
        assert!(rec.route_allowed(0, 3));
        assert!(!rec.route_allowed(3, 0));
        assert!(!rec.route_allowed(0, 1));
        assert!(Message::Removal { party: 4 }.route_allowed(0, 1));
        assert!(!Message::PredictResult { value: 0.0 }.route_allowed(3, 0));
    }
}
