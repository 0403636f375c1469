//! Secure comparison: `[[m1]]_{pk_a}, [[m2]]_{pk_b} → [[l]]_{pk_CS + pk_partner}`
//! with `l = 1` iff `m1 < m2` as signed fixed-point values.
//!
//! The center server forms `β = (2m1 + 1) − 2m2` (or its negation, chosen by
//! a private coin) with [`crate::ho_add`], blinds it with a short random
//! multiplier, and lets the computation provider read off the sign from the
//! bit length of the strong decryption. The coin hides the outcome from the
//! computation provider; the blinding hides the magnitude.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;

use crate::ciphertext::Ciphertext;
use crate::keygen::PublicParams;
use crate::keys::{CcShare, CsShare, KeyDomain, PublicKey, StrongPartial};
use crate::ops::{ho_enc, strong_decrypt};
use crate::wire::Reader;
use crate::{hoadd, CryptoError, Result};

/// The two single-key operands handed to the addition step.
#[derive(Debug, Clone)]
pub struct LtOperands {
    pub first: (Ciphertext, PublicKey),
    pub second: (Ciphertext, PublicKey),
}

/// `[[β′]]` after blinding, partially decrypted with λ1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareRequest {
    pub blinded: StrongPartial,
    /// Domain the result bit must be encrypted under.
    pub target: KeyDomain,
}

impl CompareRequest {
    pub fn encode(&self, out: &mut Vec<u8>) {
        self.blinded.encode(out);
        self.target.encode(out);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { blinded: StrongPartial::decode(r)?, target: KeyDomain::decode(r)? })
    }
}

/// Builds `[[2m1 + 1]]` and `[[2m2]]` and orders them by the coin:
/// `coin = true` yields `(2m1 + 1) + (−2m2)`, `false` yields `2m2 + (−(2m1 + 1))`.
pub fn lt_operands<R: Rng + ?Sized>(
    pp: &PublicParams,
    (ct1, pk1): (&Ciphertext, &PublicKey),
    (ct2, pk2): (&Ciphertext, &PublicKey),
    coin: bool,
    rng: &mut R,
) -> Result<LtOperands> {
    for (ct, pk) in [(ct1, pk1), (ct2, pk2)] {
        if !matches!(ct.domain(), KeyDomain::Single(_)) || ct.domain() != pk.domain() {
            return Err(CryptoError::DomainMisuse { op: "HoLT", domain: ct.domain() });
        }
    }
    let two = BigUint::from(2u32);
    let one = ho_enc(pp, pk1, &BigUint::one(), rng)?;
    let a = ct1.scale(&two, pp).add(&one, pp)?;
    let b = ct2.scale(&two, pp);
    let (first, second) = if coin {
        ((a, pk1.clone()), (b.negate(pp), pk2.clone()))
    } else {
        ((b, pk2.clone()), (a.negate(pp), pk1.clone()))
    };
    Ok(LtOperands { first, second })
}

/// Center-server step: `β′ = β^r` with `1 ≤ r < 2^blind_bits`, then λ1.
pub fn lt_blind<R: Rng + ?Sized>(
    pp: &PublicParams,
    cs: &CsShare,
    beta: &Ciphertext,
    target: KeyDomain,
    rng: &mut R,
) -> Result<CompareRequest> {
    beta.check(pp)?;
    let bound = BigUint::one() << pp.blind_bits();
    let r = rng.gen_biguint_range(&BigUint::one(), &bound);
    let blinded = beta.scale(&r, pp);
    let c1 = blinded.c1().clone();
    let p1 = cs.partial(pp, &c1);
    Ok(CompareRequest { blinded: StrongPartial { c1, p1 }, target })
}

/// Computation-provider step: `l = 1` iff `‖β′‖ > ‖N‖/2`, returned as
/// `[[l]]` under the requested joint key.
pub fn lt_decide<R: Rng + ?Sized>(
    pp: &PublicParams,
    cc: &CcShare,
    request: &CompareRequest,
    target: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext> {
    if target.domain() != request.target {
        return Err(CryptoError::DomainMismatch(target.domain(), request.target));
    }
    let beta = strong_decrypt(pp, cc, &request.blinded)?;
    let l = 2 * beta.bits() > pp.modulus_bits() as u64;
    ho_enc(pp, target, &BigUint::from(l as u8), rng)
}

/// Center-server step: undoes the coin, `[[1]] · [[l]]^{N−1}` when it was 0.
pub fn lt_finish<R: Rng + ?Sized>(
    pp: &PublicParams,
    coin: bool,
    bit: Ciphertext,
    target: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext> {
    if coin {
        return Ok(bit);
    }
    let one = ho_enc(pp, target, &BigUint::one(), rng)?;
    one.add(&bit.negate(pp), pp)
}

/// The whole comparison in one call. `target` must be `pk_CS + pk_partner`.
#[allow(clippy::too_many_arguments)]
pub fn ho_lt<R: Rng + ?Sized>(
    pp: &PublicParams,
    cs: &CsShare,
    cc: &CcShare,
    first: (&Ciphertext, &PublicKey),
    second: (&Ciphertext, &PublicKey),
    target: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext> {
    let coin = rng.gen::<bool>();
    ho_lt_with_coin(pp, cs, cc, first, second, target, coin, rng)
}

/// [`ho_lt`] with the coin fixed by the caller.
#[allow(clippy::too_many_arguments)]
pub fn ho_lt_with_coin<R: Rng + ?Sized>(
    pp: &PublicParams,
    cs: &CsShare,
    cc: &CcShare,
    first: (&Ciphertext, &PublicKey),
    second: (&Ciphertext, &PublicKey),
    target: &PublicKey,
    coin: bool,
    rng: &mut R,
) -> Result<Ciphertext> {
    let ops = lt_operands(pp, first, second, coin, rng)?;
    let beta = hoadd::ho_add(pp, cs, cc, (&ops.first.0, &ops.first.1), (&ops.second.0, &ops.second.1), rng)?;
    let request = lt_blind(pp, cs, &beta, target.domain(), rng)?;
    let bit = lt_decide(pp, cc, &request, target, rng)?;
    lt_finish(pp, coin, bit, target, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::FixedPoint;
    use crate::keygen::{KeyGenCenter, KeyGenConfig};
    use crate::ops::{par_h_dec1, par_h_dec2};
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn compare(kgc: &KeyGenCenter, m1: i64, m2: i64, coin: bool, seed: u64) -> u32 {
        let pp = kgc.params();
        let shares = kgc.strong_shares();
        let (cs, a, b) = (kgc.weak_key(0), kgc.weak_key(3), kgc.weak_key(4));
        let (pa, pb) = (a.public_key(pp), b.public_key(pp));
        let target = PublicKey::combine(pp, &cs.public_key(pp), &pa).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x1 = FixedPoint::from_ticks(&BigInt::from(m1), pp).unwrap();
        let x2 = FixedPoint::from_ticks(&BigInt::from(m2), pp).unwrap();
        let c1 = ho_enc(pp, &pa, x1.raw(), &mut rng).unwrap();
        let c2 = ho_enc(pp, &pb, x2.raw(), &mut rng).unwrap();
        let l = ho_lt_with_coin(pp, &shares.lambda1, &shares.lambda2, (&c1, &pa), (&c2, &pb), &target, coin, &mut rng)
            .unwrap();
        assert_eq!(l.domain(), KeyDomain::Joint(0, 3));
        let half = par_h_dec1(pp, &a, &l).unwrap();
        let bit = par_h_dec2(pp, &cs, &half).unwrap();
        u32::try_from(bit).unwrap()
    }

    #[test]
    fn ordering_and_ties() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 12).unwrap();
        for coin in [false, true] {
            assert_eq!(compare(&kgc, 3, 7, coin, 1), 1);
            assert_eq!(compare(&kgc, 7, 3, coin, 2), 0);
            assert_eq!(compare(&kgc, 5, 5, coin, 3), 0);
            assert_eq!(compare(&kgc, -5, 5, coin, 4), 1);
            assert_eq!(compare(&kgc, -5, -6, coin, 5), 0);
        }
    }

    #[test]
    fn extremes_of_the_signed_range() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 13).unwrap();
        let top = (1i64 << kgc.params().r1_bits()) - 1;
        for coin in [false, true] {
            for (seed, (m1, m2, want)) in
                [(-top, top, 1), (top, -top, 0), (top, top, 0), (-top, -top, 0), (top - 1, top, 1)].into_iter().enumerate()
            {
                assert_eq!(compare(&kgc, m1, m2, coin, seed as u64), want, "{m1} < {m2}, coin {coin}");
            }
        }
    }
}
