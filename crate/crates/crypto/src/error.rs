use crate::keys::KeyDomain;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("prime search exhausted after {0} attempts")]
    PrimeSearchExhausted(usize),
    #[error("generator search exhausted after {0} attempts")]
    GeneratorSearchExhausted(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("plaintext is not a residue modulo N")]
    PlaintextOutOfRange,
    #[error("value {value} outside the signed fixed-point range (|x̂| < 2^{r1_bits})")]
    FixedPointRange { value: String, r1_bits: u32 },
    #[error("{op} is not defined for a ciphertext in domain {domain}")]
    DomainMisuse { op: &'static str, domain: KeyDomain },
    #[error("ciphertext domains differ: {0} vs {1}")]
    DomainMismatch(KeyDomain, KeyDomain),
    #[error("L(x) undefined: x ≢ 1 (mod N); wrong key or domain")]
    NotDivisible,
    #[error("malformed encoding: {0}")]
    Decode(String),
}
