use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use revfrf_crypto::{
    decrypt, fixed_decode, fixed_encode, ho_add, ho_enc, ho_lt, par_h_dec1, par_h_dec2, Ciphertext, FixedPoint,
    KeyGenCenter, KeyGenConfig, PublicKey, StrongKeyShares,
};

struct Fixture {
    kgc: KeyGenCenter,
    shares: StrongKeyShares,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = KeyGenConfig { scale_digits: 4, ..KeyGenConfig::with_prime_bits(64) };
        let kgc = KeyGenCenter::generate(cfg, 99).unwrap();
        let shares = kgc.strong_shares();
        Fixture { kgc, shares }
    })
}

fn big(v: u128) -> BigUint {
    BigUint::from(v) % fixture().kgc.params().n()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_key_sum(a in any::<u128>(), b in any::<u128>(), seed in any::<u64>()) {
        let f = fixture();
        let pp = f.kgc.params();
        let sk = f.kgc.weak_key(3);
        let pk = sk.public_key(pp);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = (big(a), big(b));
        let ca = ho_enc(pp, &pk, &a, &mut rng).unwrap();
        let cb = ho_enc(pp, &pk, &b, &mut rng).unwrap();
        prop_assert_eq!(decrypt(pp, &sk, &ca.add(&cb, pp).unwrap()).unwrap(), (a + b) % pp.n());
    }

    #[test]
    fn cross_key_sum(a in any::<u128>(), b in any::<u128>(), seed in any::<u64>()) {
        let f = fixture();
        let pp = f.kgc.params();
        let (ua, ub) = (f.kgc.weak_key(3), f.kgc.weak_key(4));
        let (pa, pb) = (ua.public_key(pp), ub.public_key(pp));
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = (big(a), big(b));
        let ca = ho_enc(pp, &pa, &a, &mut rng).unwrap();
        let cb = ho_enc(pp, &pb, &b, &mut rng).unwrap();
        let sum = ho_add(pp, &f.shares.lambda1, &f.shares.lambda2, (&ca, &pa), (&cb, &pb), &mut rng).unwrap();
        let got = par_h_dec2(pp, &ub, &par_h_dec1(pp, &ua, &sum).unwrap()).unwrap();
        prop_assert_eq!(got, (a + b) % pp.n());
    }

    #[test]
    fn comparison_matches_integers(m1 in -30_000i64..30_000, m2 in -30_000i64..30_000, seed in any::<u64>()) {
        let f = fixture();
        let pp = f.kgc.params();
        let (cs, ua, ub) = (f.kgc.weak_key(0), f.kgc.weak_key(3), f.kgc.weak_key(4));
        let (pa, pb) = (ua.public_key(pp), ub.public_key(pp));
        let target = PublicKey::combine(pp, &cs.public_key(pp), &pa).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x1 = FixedPoint::from_ticks(&BigInt::from(m1), pp).unwrap();
        let x2 = FixedPoint::from_ticks(&BigInt::from(m2), pp).unwrap();
        let c1 = ho_enc(pp, &pa, x1.raw(), &mut rng).unwrap();
        let c2 = ho_enc(pp, &pb, x2.raw(), &mut rng).unwrap();
        let l = ho_lt(pp, &f.shares.lambda1, &f.shares.lambda2, (&c1, &pa), (&c2, &pb), &target, &mut rng).unwrap();
        let bit = par_h_dec2(pp, &cs, &par_h_dec1(pp, &ua, &l).unwrap()).unwrap();
        prop_assert_eq!(bit, BigUint::from((m1 < m2) as u8));
    }

    #[test]
    fn fixed_point_roundtrip(x in -1.0e5f64..1.0e5) {
        let pp = fixture().kgc.params();
        let v = fixed_encode(x, pp).unwrap();
        let back = fixed_decode(&v, pp);
        prop_assert!((back - x).abs() <= 0.5e-4 + 1e-9);
        prop_assert_eq!((back < 0.0) && back != 0.0, v.ticks(pp) < BigInt::from(0));
    }

    #[test]
    fn ciphertext_bytes_roundtrip(a in any::<u128>(), seed in any::<u64>()) {
        let f = fixture();
        let pp = f.kgc.params();
        let pk = f.kgc.weak_key(7).public_key(pp);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ct = ho_enc(pp, &pk, &big(a), &mut rng).unwrap();
        let bytes = ct.to_bytes();
        prop_assert_eq!(Ciphertext::from_bytes(&bytes).unwrap(), ct);
        prop_assert!(Ciphertext::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}

#[test]
fn fixed_point_rejects_overflow() {
    let pp = fixture().kgc.params();
    let limit = 2f64.powi(pp.r1_bits() as i32) / 1e4;
    assert!(fixed_encode(limit * 1.01, pp).is_err());
    assert!(fixed_encode(-limit * 1.01, pp).is_err());
}
