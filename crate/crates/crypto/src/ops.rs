use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::ciphertext::Ciphertext;
use crate::keygen::PublicParams;
use crate::keys::{CcShare, KeyDomain, PublicKey, SecretKey, StrongPartial};
use crate::{CryptoError, Result};

/// `L(x) = (x − 1)/N`, defined only when `N | x − 1`.
pub fn l_function(x: &BigUint, n: &BigUint) -> Result<BigUint> {
    if x.is_zero() {
        return Err(CryptoError::NotDivisible);
    }
    let (quotient, rem) = (x - 1u32).div_rem(n);
    if !rem.is_zero() {
        return Err(CryptoError::NotDivisible);
    }
    Ok(quotient)
}

fn inverse(x: &BigUint, pp: &PublicParams) -> Result<BigUint> {
    x.modinv(pp.n_squared()).ok_or(CryptoError::NotDivisible)
}

/// HoEnc: `C1 = h^r (1 + mN)`, `C2 = g^r` with `r ∈ [1, N/4]`.
pub fn ho_enc<R: Rng + ?Sized>(pp: &PublicParams, pk: &PublicKey, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
    if m >= pp.n() {
        return Err(CryptoError::PlaintextOutOfRange);
    }
    let n2 = pp.n_squared();
    let r = rng.gen_biguint_range(&BigUint::one(), &((pp.n() >> 2u32) + 1u32));
    let one_plus_mn = (BigUint::one() + m * pp.n()) % n2;
    let c1 = (pk.h().modpow(&r, n2) * one_plus_mn) % n2;
    let c2 = pp.g().modpow(&r, n2);
    Ok(Ciphertext::new(c1, c2, pk.domain()))
}

/// HReEnc: the holder of `sk_other` folds its key into a single-key
/// ciphertext, `C1′ = C1 · C2^{sk_other}`. The result needs both weak keys.
pub fn ho_re_enc(pp: &PublicParams, sk_other: &SecretKey, ct: &Ciphertext) -> Result<Ciphertext> {
    let owner = match ct.domain() {
        KeyDomain::Single(owner) if owner != sk_other.id() => owner,
        domain => return Err(CryptoError::DomainMisuse { op: "HReEnc", domain }),
    };
    ct.check(pp)?;
    let n2 = pp.n_squared();
    let c1 = (ct.c1() * ct.c2().modpow(sk_other.exponent(), n2)) % n2;
    Ok(Ciphertext::new(c1, ct.c2().clone(), KeyDomain::joint(owner, sk_other.id())))
}

/// HEncRef: `C1′ = C1 · C2^{r_p}`. The plaintext is unchanged but the
/// effective key becomes `sk + r_p`, so the original key no longer opens it.
pub fn ho_enc_ref(pp: &PublicParams, r_p: &BigUint, ct: &Ciphertext) -> Result<Ciphertext> {
    let owner = match ct.domain() {
        KeyDomain::Single(k) | KeyDomain::Refreshed(k) => k,
        domain => return Err(CryptoError::DomainMisuse { op: "HEncRef", domain }),
    };
    let n2 = pp.n_squared();
    let c1 = (ct.c1() * ct.c2().modpow(r_p, n2)) % n2;
    Ok(Ciphertext::new(c1, ct.c2().clone(), KeyDomain::Refreshed(owner)))
}

/// ParHDec1: strips `sk_u` from a joint ciphertext, `C1′ = C1 / C2^{sk_u}`.
pub fn par_h_dec1(pp: &PublicParams, sk_u: &SecretKey, ct: &Ciphertext) -> Result<Ciphertext> {
    let rest = ct
        .domain()
        .without(sk_u.id())
        .ok_or(CryptoError::DomainMisuse { op: "ParHDec1", domain: ct.domain() })?;
    ct.check(pp)?;
    let n2 = pp.n_squared();
    let mask = inverse(&ct.c2().modpow(sk_u.exponent(), n2), pp)?;
    Ok(Ciphertext::new((ct.c1() * mask) % n2, ct.c2().clone(), rest))
}

/// ParHDec2: `m = L(C1 / C2^{sk_v} mod N²) mod N`.
///
/// A wrong key is not detectable in general; it shows up either as
/// [`CryptoError::NotDivisible`] or as an unrelated plaintext.
pub fn par_h_dec2(pp: &PublicParams, sk_v: &SecretKey, ct: &Ciphertext) -> Result<BigUint> {
    if ct.domain() != KeyDomain::Single(sk_v.id()) {
        return Err(CryptoError::DomainMisuse { op: "ParHDec2", domain: ct.domain() });
    }
    ct.check(pp)?;
    let n2 = pp.n_squared();
    let mask = inverse(&ct.c2().modpow(sk_v.exponent(), n2), pp)?;
    let x = (ct.c1() * mask) % n2;
    Ok(l_function(&x, pp.n())? % pp.n())
}

/// Single-key decryption; identical to ParHDec2.
pub fn decrypt(pp: &PublicParams, sk: &SecretKey, ct: &Ciphertext) -> Result<BigUint> {
    par_h_dec2(pp, sk, ct)
}

/// Computation-provider half of a strong decryption:
/// `m = L(C1^λ1 · C1^λ2 mod N²) mod N`. Works for any key domain.
pub fn strong_decrypt(pp: &PublicParams, cc: &CcShare, partial: &StrongPartial) -> Result<BigUint> {
    let n2 = pp.n_squared();
    let p2 = cc.partial(pp, &partial.c1);
    let x = (&partial.p1 * p2) % n2;
    Ok(l_function(&x, pp.n())? % pp.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::{KeyGenCenter, KeyGenConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> KeyGenCenter {
        KeyGenCenter::from_primes(7u32.into(), 11u32.into(), 0, 21).unwrap()
    }

    #[test]
    fn l_function_requires_divisibility() {
        let n = BigUint::from(77u32);
        assert_eq!(l_function(&BigUint::from(155u32), &n).unwrap(), BigUint::from(2u32));
        assert_eq!(l_function(&BigUint::from(156u32), &n), Err(CryptoError::NotDivisible));
        assert_eq!(l_function(&BigUint::zero(), &n), Err(CryptoError::NotDivisible));
    }

    #[test]
    fn roundtrip_zero_and_five() {
        let kgc = toy();
        let pp = kgc.params();
        let sk = kgc.weak_key(3);
        let pk = sk.public_key(pp);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        for m in [0u32, 5, 76] {
            let ct = ho_enc(pp, &pk, &m.into(), &mut rng).unwrap();
            assert_eq!(decrypt(pp, &sk, &ct).unwrap(), BigUint::from(m));
        }
        assert_eq!(ho_enc(pp, &pk, &77u32.into(), &mut rng), Err(CryptoError::PlaintextOutOfRange));
    }

    #[test]
    fn re_encryption_needs_both_keys() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 1).unwrap();
        let pp = kgc.params();
        let (u, cs) = (kgc.weak_key(5), kgc.weak_key(0));
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let ct = ho_enc(pp, &u.public_key(pp), &42u32.into(), &mut rng).unwrap();
        let joint = ho_re_enc(pp, &cs, &ct).unwrap();
        assert_eq!(joint.domain(), KeyDomain::Joint(0, 5));
        let half = par_h_dec1(pp, &u, &joint).unwrap();
        assert_eq!(half.domain(), KeyDomain::Single(0));
        assert_eq!(par_h_dec2(pp, &cs, &half).unwrap(), BigUint::from(42u32));
        // Stripping in the other order works as well.
        let other = par_h_dec1(pp, &cs, &joint).unwrap();
        assert_eq!(par_h_dec2(pp, &u, &other).unwrap(), BigUint::from(42u32));
        // Joint ciphertexts cannot be re-encrypted again or opened by one key.
        assert!(matches!(ho_re_enc(pp, &kgc.weak_key(7), &joint), Err(CryptoError::DomainMisuse { .. })));
        assert!(matches!(par_h_dec2(pp, &u, &joint), Err(CryptoError::DomainMisuse { .. })));
        // Forcing the single-key tag does not help.
        let forged = joint.clone().with_domain(KeyDomain::Single(5));
        assert_ne!(par_h_dec2(pp, &u, &forged), Ok(BigUint::from(42u32)));
    }

    #[test]
    fn re_encrypting_toward_self_is_misuse() {
        let kgc = toy();
        let pp = kgc.params();
        let sk = kgc.weak_key(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let ct = ho_enc(pp, &sk.public_key(pp), &1u32.into(), &mut rng).unwrap();
        assert!(ho_re_enc(pp, &sk, &ct).is_err());
    }

    #[test]
    fn refresh_with_zero_is_identity_on_c1() {
        let kgc = toy();
        let pp = kgc.params();
        let sk = kgc.weak_key(1);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ct = ho_enc(pp, &sk.public_key(pp), &9u32.into(), &mut rng).unwrap();
        let refreshed = ho_enc_ref(pp, &BigUint::zero(), &ct).unwrap();
        assert_eq!(refreshed.c1(), ct.c1());
        assert_eq!(refreshed.domain(), KeyDomain::Refreshed(1));
        let retagged = refreshed.with_domain(KeyDomain::Single(1));
        assert_eq!(decrypt(pp, &sk, &retagged).unwrap(), BigUint::from(9u32));
    }

    #[test]
    fn strong_shares_decrypt_any_domain() {
        let kgc = KeyGenCenter::generate(KeyGenConfig::with_prime_bits(40), 2).unwrap();
        let pp = kgc.params();
        let shares = kgc.strong_shares();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for id in [3u16, 9] {
            let pk = kgc.weak_key(id).public_key(pp);
            let ct = ho_enc(pp, &pk, &1234u32.into(), &mut rng).unwrap();
            let partial = StrongPartial { c1: ct.c1().clone(), p1: shares.lambda1.partial(pp, ct.c1()) };
            assert_eq!(strong_decrypt(pp, &shares.lambda2, &partial).unwrap(), BigUint::from(1234u32));
        }
    }
}
