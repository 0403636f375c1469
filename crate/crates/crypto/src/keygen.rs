use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::keys::{CcShare, CsShare, KeyId, SecretKey};
use crate::prime::{default_attempt_budget, is_safe_prime, random_safe_prime};
use crate::wire::{put_biguint, put_u32, Reader};
use crate::{CryptoError, Result};

const GENERATOR_ATTEMPTS: usize = 10_000;
const MIN_PRIME_BITS: usize = 32;

/// System-wide public parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
    /// Bit length of each prime factor.
    kappa: u32,
    /// Fixed-point scale exponent: reals are stored as `round(x·10^c)`.
    scale_digits: u32,
    /// Signed plaintexts must satisfy `|x̂| < 2^r1_bits`.
    r1_bits: u32,
    /// The comparison blinding factor has fewer than `‖N‖/4` bits.
    blind_bits: u32,
}

impl PublicParams {
    fn new(n: BigUint, g: BigUint, kappa: u32, scale_digits: u32, r1_bits: Option<u32>) -> Result<Self> {
        let n_bits = n.bits() as u32;
        let quarter = n_bits.div_ceil(4);
        let blind_bits = quarter.saturating_sub(1).max(1);
        let mut pp = Self { n_squared: &n * &n, n, g, kappa, scale_digits, r1_bits: 0, blind_bits };
        match r1_bits {
            Some(bits) => pp.r1_bits = bits,
            // Largest range that keeps the blinded comparison sound.
            None => {
                pp.r1_bits = (0..=blind_bits)
                    .rev()
                    .find(|&bits| Self { r1_bits: bits, ..pp.clone() }.validate().is_ok())
                    .unwrap_or(0)
            }
        }
        pp.validate()?;
        Ok(pp)
    }

    /// Checks the structural invariants that do not need the factorization.
    pub fn validate(&self) -> Result<()> {
        let n_bits = self.modulus_bits();
        if 4 * self.r1_bits >= n_bits {
            return Err(CryptoError::InvalidParams(format!(
                "‖R1‖ = {} must be below ‖N‖/4 = {}/4",
                self.r1_bits, n_bits
            )));
        }
        if self.g.is_zero() || self.g >= self.n_squared {
            return Err(CryptoError::InvalidParams("generator outside Z_N²".into()));
        }
        // The comparison decides the sign of r·β by bit length; the largest
        // blinded positive must stay at or below ‖N‖/2 bits and the smallest
        // blinded negative above it.
        let r1 = self.r1();
        let max_beta = (&r1 << 2u32) - 3u32;
        let max_blind = (BigUint::one() << self.blind_bits) - 1u32;
        let max_mag = max_beta * max_blind;
        if 2 * max_mag.bits() > n_bits as u64 || 2 * (&self.n - &max_mag).bits() <= n_bits as u64 {
            return Err(CryptoError::InvalidParams(format!(
                "comparison range 2^{} with {}-bit blinding is unsound for a {}-bit modulus",
                self.r1_bits, self.blind_bits, n_bits
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn scale_digits(&self) -> u32 {
        self.scale_digits
    }

    pub fn r1_bits(&self) -> u32 {
        self.r1_bits
    }

    pub fn r1(&self) -> BigUint {
        BigUint::one() << self.r1_bits
    }

    pub fn blind_bits(&self) -> u32 {
        self.blind_bits
    }

    pub fn modulus_bits(&self) -> u32 {
        self.n.bits() as u32
    }

    /// Size in bytes of one serialized ciphertext component at this modulus.
    pub fn component_bytes(&self) -> usize {
        (self.n_squared.bits() as usize).div_ceil(8)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_biguint(&mut out, &self.n);
        put_biguint(&mut out, &self.g);
        put_u32(&mut out, self.kappa);
        put_u32(&mut out, self.scale_digits);
        put_u32(&mut out, self.r1_bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let n = r.biguint()?;
        let g = r.biguint()?;
        let kappa = r.u32()?;
        let scale = r.u32()?;
        let r1_bits = r.u32()?;
        r.finish()?;
        Self::new(n, g, kappa, scale, Some(r1_bits))
    }
}

/// The master trapdoor and its two additive shares.
///
/// `λ1 + λ2 ≡ 0 (mod λ)` and `λ1 + λ2 ≡ 1 (mod N²)`.
#[derive(Clone, PartialEq, Eq)]
pub struct StrongKeyShares {
    pub lambda: BigUint,
    pub lambda1: CsShare,
    pub lambda2: CcShare,
}

impl std::fmt::Debug for StrongKeyShares {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StrongKeyShares(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyGenConfig {
    /// Bits per prime factor (κ).
    pub prime_bits: usize,
    pub scale_digits: u32,
    /// Defaults to the widest range the comparison tolerates
    /// (`‖N‖/4 − 1` for even κ).
    pub r1_bits: Option<u32>,
    pub max_prime_attempts: Option<usize>,
}

impl Default for KeyGenConfig {
    fn default() -> Self {
        Self { prime_bits: 512, scale_digits: 6, r1_bits: None, max_prime_attempts: None }
    }
}

impl KeyGenConfig {
    pub fn with_prime_bits(prime_bits: usize) -> Self {
        Self { prime_bits, ..Self::default() }
    }
}

/// Key generation center. Holds the factorization; everything it hands out
/// is a deterministic function of the seed.
#[derive(Clone)]
pub struct KeyGenCenter {
    params: PublicParams,
    p: BigUint,
    q: BigUint,
    seed: u64,
}

impl std::fmt::Debug for KeyGenCenter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyGenCenter").field("params", &self.params).finish_non_exhaustive()
    }
}

fn labelled_rng(seed: u64, label: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&label.to_le_bytes());
    key[16..24].copy_from_slice(b"dt-pkc\0\0");
    ChaCha20Rng::from_seed(key)
}

const LABEL_PRIMES: u64 = 1;
const LABEL_GENERATOR: u64 = 2;
const LABEL_SHARES: u64 = 3;
const LABEL_WEAK: u64 = 1 << 32;

impl KeyGenCenter {
    pub fn generate(config: KeyGenConfig, seed: u64) -> Result<Self> {
        if config.prime_bits < MIN_PRIME_BITS {
            return Err(CryptoError::InvalidParams(format!(
                "κ = {} bits; random key generation needs at least {MIN_PRIME_BITS}",
                config.prime_bits
            )));
        }
        let attempts = config.max_prime_attempts.unwrap_or_else(|| default_attempt_budget(config.prime_bits));
        let mut rng = labelled_rng(seed, LABEL_PRIMES);
        let (p, _) = random_safe_prime(config.prime_bits, &mut rng, attempts)?;
        let q = loop {
            let (q, _) = random_safe_prime(config.prime_bits, &mut rng, attempts)?;
            if q != p {
                break q;
            }
        };
        Self::assemble(p, q, config.prime_bits as u32, config.scale_digits, config.r1_bits, seed)
    }

    /// Builds keys from caller-chosen safe primes; used for toy moduli such
    /// as `N = 7 · 11` where exhaustive checks are feasible.
    pub fn from_primes(p: BigUint, q: BigUint, scale_digits: u32, seed: u64) -> Result<Self> {
        let mut rng = labelled_rng(seed, LABEL_PRIMES);
        if p == q || !is_safe_prime(&p, &mut rng) || !is_safe_prime(&q, &mut rng) {
            return Err(CryptoError::InvalidParams("p and q must be distinct safe primes".into()));
        }
        let kappa = p.bits().max(q.bits()) as u32;
        Self::assemble(p, q, kappa, scale_digits, None, seed)
    }

    fn assemble(p: BigUint, q: BigUint, kappa: u32, scale: u32, r1_bits: Option<u32>, seed: u64) -> Result<Self> {
        let n = &p * &q;
        let n_squared = &n * &n;
        let p_half = (&p - 1u32) >> 1;
        let q_half = (&q - 1u32) >> 1;
        let order = (&p_half * &q_half) << 1;
        let mut rng = labelled_rng(seed, LABEL_GENERATOR);
        let two_n = &n << 1;
        let mut g = None;
        for _ in 0..GENERATOR_ATTEMPTS {
            let a = rng.gen_biguint_range(&BigUint::from(2u32), &n_squared);
            if !a.gcd(&n).is_one() {
                continue;
            }
            // g = −a^{2N} mod N²
            let candidate = &n_squared - a.modpow(&two_n, &n_squared);
            let full_order = candidate.modpow(&order, &n_squared).is_one()
                && !candidate.modpow(&(&p_half * &q_half), &n_squared).is_one()
                && !candidate.modpow(&(&p_half << 1), &n_squared).is_one()
                && !candidate.modpow(&(&q_half << 1), &n_squared).is_one();
            if full_order {
                g = Some(candidate);
                break;
            }
        }
        let g = g.ok_or(CryptoError::GeneratorSearchExhausted(GENERATOR_ATTEMPTS))?;
        let params = PublicParams::new(n, g, kappa, scale, r1_bits)?;
        Ok(Self { params, p, q, seed })
    }

    pub fn params(&self) -> &PublicParams {
        &self.params
    }

    pub fn primes(&self) -> (&BigUint, &BigUint) {
        (&self.p, &self.q)
    }

    pub fn lambda(&self) -> BigUint {
        (&self.p - 1u32).lcm(&(&self.q - 1u32))
    }

    /// Splits λ into the two shares. `S = λ·(λ⁻¹ mod N²)` satisfies both
    /// congruences; λ1 is uniform below `λN²` and `λ2 = S − λ1 mod λN²`.
    pub fn strong_shares(&self) -> StrongKeyShares {
        let lambda = self.lambda();
        let n_squared = self.params.n_squared();
        let modulus = &lambda * n_squared;
        let inv = lambda.modinv(n_squared).expect("gcd(λ, N²) = 1 for distinct safe primes");
        let s = (&lambda * inv) % &modulus;
        let mut rng = labelled_rng(self.seed, LABEL_SHARES);
        let lambda1 = rng.gen_biguint_below(&modulus);
        let lambda2 = (&s + &modulus - &lambda1) % &modulus;
        StrongKeyShares { lambda, lambda1: CsShare::new(lambda1), lambda2: CcShare::new(lambda2) }
    }

    /// Weak private key for party `id`, uniform in `[1, N/4]`.
    pub fn weak_key(&self, id: KeyId) -> SecretKey {
        let mut rng = labelled_rng(self.seed, LABEL_WEAK | id as u64);
        let upper = (self.params.n() >> 2u32) + 1u32;
        let x = rng.gen_biguint_range(&BigUint::one(), &upper);
        SecretKey::new(id, x)
    }
}
