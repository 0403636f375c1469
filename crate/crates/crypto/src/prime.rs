//! Probabilistic primality testing and safe-prime search.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::{CryptoError, Result};

const SIEVE_LIMIT: u32 = 2048;
const MILLER_RABIN_ROUNDS: usize = 32;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = SIEVE_LIMIT as usize;
        let mut composite = vec![false; limit];
        let mut out = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

fn miller_rabin_round(n: &BigUint, n_minus_1: &BigUint, d: &BigUint, s: u64, base: &BigUint) -> bool {
    let mut x = base.modpow(d, n);
    if x.is_one() || &x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = x.modpow(&BigUint::from(2u32), n);
        if &x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Miller–Rabin with trial division by the primes below 2048.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    if let Some(small) = n.to_u32() {
        if small < 2 {
            return false;
        }
        if small < SIEVE_LIMIT {
            return small_primes().binary_search(&small).is_ok();
        }
    }
    for &p in small_primes() {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u32);
    if !miller_rabin_round(n, &n_minus_1, &d, s, &two) {
        return false;
    }
    let upper = &n_minus_1 - 1u32;
    for _ in 1..MILLER_RABIN_ROUNDS {
        let base = rng.gen_biguint_range(&two, &upper);
        if !miller_rabin_round(n, &n_minus_1, &d, s, &base) {
            return false;
        }
    }
    true
}

/// `p` is a safe prime when both `p` and `(p−1)/2` are prime.
pub fn is_safe_prime<R: Rng + ?Sized>(p: &BigUint, rng: &mut R) -> bool {
    if p < &BigUint::from(5u32) || p.is_even() {
        return false;
    }
    let half = (p - 1u32) >> 1;
    is_probable_prime(&half, rng) && is_probable_prime(p, rng)
}

/// Default attempt budget for a safe prime of `bits` bits; roughly a few
/// hundred times the expected number of candidates.
pub fn default_attempt_budget(bits: usize) -> usize {
    (bits * bits * 64).max(10_000)
}

/// Draws a safe prime `p = 2p′ + 1` with exactly `bits` bits and the top two
/// bits set, so that the product of two such primes has exactly `2·bits`
/// bits. Returns `(p, p′)`.
pub fn random_safe_prime<R: Rng + ?Sized>(
    bits: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<(BigUint, BigUint)> {
    if bits < 5 {
        return Err(CryptoError::InvalidParams(format!(
            "safe prime of {bits} bits requested; need at least 5"
        )));
    }
    let half_bits = bits - 1;
    let top = (BigUint::one() << (half_bits - 1)) | (BigUint::one() << (half_bits - 2));
    let primes = small_primes();
    for _ in 0..max_attempts {
        let mut candidate = rng.gen_biguint(half_bits as u64);
        candidate |= &top;
        candidate |= BigUint::one();
        let p = (&candidate << 1) + 1u32;
        let sieved = primes.iter().skip(1).all(|&sp| {
            let r = (&candidate % sp).to_u32().unwrap_or(0);
            // p′ ≡ 0 kills p′, p′ ≡ (sp−1)/2 kills p = 2p′+1.
            (r != 0 || candidate == BigUint::from(sp)) && (r != (sp - 1) / 2 || p == BigUint::from(sp))
        });
        if !sieved {
            continue;
        }
        // Cheap Fermat filter on p before the expensive rounds on both.
        if !BigUint::from(2u32).modpow(&(&p - 1u32), &p).is_one() {
            continue;
        }
        if is_probable_prime(&candidate, rng) && is_probable_prime(&p, rng) {
            return Ok((p, candidate));
        }
    }
    Err(CryptoError::PrimeSearchExhausted(max_attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn agrees_with_trial_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in 0u64..20_000 {
            assert_eq!(is_probable_prime(&BigUint::from(n), &mut rng), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn carmichael_numbers_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265, 321197185] {
            assert!(!is_probable_prime(&BigUint::from(n), &mut rng));
        }
    }

    #[test]
    fn safe_prime_has_prime_half() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for bits in [8usize, 16, 33, 64] {
            let (p, half) = random_safe_prime(bits, &mut rng, default_attempt_budget(bits)).unwrap();
            assert_eq!(p.bits() as usize, bits);
            assert_eq!(&half * 2u32 + 1u32, p);
            assert!(is_safe_prime(&p, &mut rng));
        }
    }

    #[test]
    fn small_safe_primes() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let safe: Vec<u32> = (0..100).filter(|&n| is_safe_prime(&BigUint::from(n), &mut rng)).collect();
        assert_eq!(safe, vec![5, 7, 11, 23, 47, 59, 83]);
    }

    #[test]
    fn exhaustion_is_reported() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        assert_eq!(random_safe_prime(256, &mut rng, 1), Err(CryptoError::PrimeSearchExhausted(1)));
    }
}
