//! Cross-domain addition `[[m1]]_{pk_a}, [[m2]]_{pk_b} → [[m1 + m2]]_{pk_a + pk_b}`.
//!
//! Three steps, split so the protocol layer can put a network hop between
//! each: the center server masks both operands and applies its strong share
//! ([`ho_add_start`]); the computation provider completes the strong
//! decryption of the masked sums and re-encrypts under the joint key
//! ([`ho_add_respond`]); the center server removes the masks
//! ([`ho_add_finish`]).

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

use crate::ciphertext::Ciphertext;
use crate::keygen::PublicParams;
use crate::keys::{CcShare, CsShare, KeyDomain, PublicKey, StrongPartial};
use crate::ops::{ho_enc, strong_decrypt};
use crate::wire::Reader;
use crate::{CryptoError, Result};

/// What the center server sends the computation provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoAddRequest {
    pub first: StrongPartial,
    pub second: StrongPartial,
    /// Joint domain the sum must come back under.
    pub target: KeyDomain,
}

impl HoAddRequest {
    pub fn encode(&self, out: &mut Vec<u8>) {
        self.first.encode(out);
        self.second.encode(out);
        self.target.encode(out);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { first: StrongPartial::decode(r)?, second: StrongPartial::decode(r)?, target: KeyDomain::decode(r)? })
    }
}

/// Center-server state kept between the request and the reply.
#[derive(Debug, Clone)]
pub struct HoAddPending {
    mask_sum: BigUint,
    joint: PublicKey,
}

impl HoAddPending {
    /// Key the sum will be encrypted under.
    pub fn joint(&self) -> &PublicKey {
        &self.joint
    }
}

fn single_key(ct: &Ciphertext, pk: &PublicKey) -> Result<()> {
    match ct.domain() {
        KeyDomain::Single(_) if ct.domain() == pk.domain() => Ok(()),
        domain => Err(CryptoError::DomainMisuse { op: "HoAdd", domain }),
    }
}

pub fn ho_add_start<R: Rng + ?Sized>(
    pp: &PublicParams,
    cs: &CsShare,
    (ct1, pk1): (&Ciphertext, &PublicKey),
    (ct2, pk2): (&Ciphertext, &PublicKey),
    rng: &mut R,
) -> Result<(HoAddRequest, HoAddPending)> {
    single_key(ct1, pk1)?;
    single_key(ct2, pk2)?;
    ct1.check(pp)?;
    ct2.check(pp)?;
    // Both operands under the same key: the sum stays under that key.
    let joint = if pk1.domain() == pk2.domain() { pk1.clone() } else { PublicKey::combine(pp, pk1, pk2)? };
    let alpha1 = rng.gen_biguint_below(pp.n());
    let alpha2 = rng.gen_biguint_below(pp.n());
    let masked1 = ct1.add(&ho_enc(pp, pk1, &alpha1, rng)?, pp)?;
    let masked2 = ct2.add(&ho_enc(pp, pk2, &alpha2, rng)?, pp)?;
    let partial = |ct: &Ciphertext| StrongPartial { c1: ct.c1().clone(), p1: cs.partial(pp, ct.c1()) };
    let request = HoAddRequest { first: partial(&masked1), second: partial(&masked2), target: joint.domain() };
    let pending = HoAddPending { mask_sum: (alpha1 + alpha2) % pp.n(), joint };
    Ok((request, pending))
}

/// Computation-provider step. Sees only `m1 + α1` and `m2 + α2`.
pub fn ho_add_respond<R: Rng + ?Sized>(
    pp: &PublicParams,
    cc: &CcShare,
    request: &HoAddRequest,
    joint: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext> {
    if joint.domain() != request.target {
        return Err(CryptoError::DomainMismatch(joint.domain(), request.target));
    }
    let a = strong_decrypt(pp, cc, &request.first)?;
    let b = strong_decrypt(pp, cc, &request.second)?;
    ho_enc(pp, joint, &((a + b) % pp.n()), rng)
}

/// Center-server step: `reply · [[α1 + α2]]^{N−1}`.
pub fn ho_add_finish<R: Rng + ?Sized>(
    pp: &PublicParams,
    pending: HoAddPending,
    reply: &Ciphertext,
    rng: &mut R,
) -> Result<Ciphertext> {
    if reply.domain() != pending.joint.domain() {
        return Err(CryptoError::DomainMismatch(reply.domain(), pending.joint.domain()));
    }
    reply.check(pp)?;
    let masks = ho_enc(pp, &pending.joint, &pending.mask_sum, rng)?;
    reply.add(&masks.negate(pp), pp)
}

/// All three steps in one call, for callers that hold both shares.
pub fn ho_add<R: Rng + ?Sized>(
    pp: &PublicParams,
    cs: &CsShare,
    cc: &CcShare,
    first: (&Ciphertext, &PublicKey),
    second: (&Ciphertext, &PublicKey),
    rng: &mut R,
) -> Result<Ciphertext> {
    let (request, pending) = ho_add_start(pp, cs, first, second, rng)?;
    let reply = ho_add_respond(pp, cc, &request, &pending.joint, rng)?;
    ho_add_finish(pp, pending, &reply, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::{KeyGenCenter, KeyGenConfig};
    use crate::ops::{par_h_dec1, par_h_dec2};
    use crate::SecretKey;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn joint_decrypt(pp: &PublicParams, a: &SecretKey, b: &SecretKey, ct: &Ciphertext) -> BigUint {
        par_h_dec2(pp, b, &par_h_dec1(pp, a, ct).unwrap()).unwrap()
    }

    #[test]
    fn small_sum_and_inverse() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 6).unwrap();
        let pp = kgc.params();
        let shares = kgc.strong_shares();
        let (a, b) = (kgc.weak_key(3), kgc.weak_key(4));
        let (pa, pb) = (a.public_key(pp), b.public_key(pp));
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let ct1 = ho_enc(pp, &pa, &2u32.into(), &mut rng).unwrap();
        let ct2 = ho_enc(pp, &pb, &3u32.into(), &mut rng).unwrap();
        let sum = ho_add(pp, &shares.lambda1, &shares.lambda2, (&ct1, &pa), (&ct2, &pb), &mut rng).unwrap();
        assert_eq!(sum.domain(), KeyDomain::Joint(3, 4));
        assert_eq!(joint_decrypt(pp, &a, &b, &sum), BigUint::from(5u32));

        let x = BigUint::from(123_456u32);
        let ct1 = ho_enc(pp, &pa, &x, &mut rng).unwrap();
        let ct2 = ho_enc(pp, &pb, &(pp.n() - &x), &mut rng).unwrap();
        let sum = ho_add(pp, &shares.lambda1, &shares.lambda2, (&ct1, &pa), (&ct2, &pb), &mut rng).unwrap();
        assert_eq!(joint_decrypt(pp, &b, &a, &sum), BigUint::from(0u32));
    }

    #[test]
    fn rejects_joint_operands() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 6).unwrap();
        let pp = kgc.params();
        let shares = kgc.strong_shares();
        let (a, b) = (kgc.weak_key(3), kgc.weak_key(4));
        let (pa, pb) = (a.public_key(pp), b.public_key(pp));
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let ct = ho_enc(pp, &pa, &2u32.into(), &mut rng).unwrap();
        let joint = crate::ops::ho_re_enc(pp, &b, &ct).unwrap();
        let r = ho_add(pp, &shares.lambda1, &shares.lambda2, (&joint, &pa), (&ct, &pb), &mut rng);
        assert!(matches!(r, Err(CryptoError::DomainMisuse { .. })));
    }
}
