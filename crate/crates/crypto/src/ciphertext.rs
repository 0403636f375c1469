use num_bigint::BigUint;

use crate::keygen::PublicParams;
use crate::keys::KeyDomain;
use crate::wire::{put_biguint, Reader};
use crate::{CryptoError, Result};

/// `[[m]] = (C1, C2)` with both components in `Z_N²`.
///
/// The domain tag is bookkeeping: it records which keys the protocol
/// believes are needed, and the decryption routines refuse obviously wrong
/// combinations. It is not authenticated and anyone can re-tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    c1: BigUint,
    c2: BigUint,
    domain: KeyDomain,
}

impl Ciphertext {
    pub fn new(c1: BigUint, c2: BigUint, domain: KeyDomain) -> Self {
        Self { c1, c2, domain }
    }

    pub fn c1(&self) -> &BigUint {
        &self.c1
    }

    pub fn c2(&self) -> &BigUint {
        &self.c2
    }

    pub fn domain(&self) -> KeyDomain {
        self.domain
    }

    pub fn with_domain(mut self, domain: KeyDomain) -> Self {
        self.domain = domain;
        self
    }

    pub(crate) fn check(&self, pp: &PublicParams) -> Result<()> {
        if &self.c1 >= pp.n_squared() || &self.c2 >= pp.n_squared() {
            return Err(CryptoError::Decode("ciphertext component outside Z_N²".into()));
        }
        Ok(())
    }

    /// Homomorphic addition of two ciphertexts under the same key:
    /// componentwise product mod N².
    pub fn add(&self, other: &Ciphertext, pp: &PublicParams) -> Result<Ciphertext> {
        if self.domain != other.domain {
            return Err(CryptoError::DomainMismatch(self.domain, other.domain));
        }
        let n2 = pp.n_squared();
        Ok(Ciphertext {
            c1: (&self.c1 * &other.c1) % n2,
            c2: (&self.c2 * &other.c2) % n2,
            domain: self.domain,
        })
    }

    /// Homomorphic scalar multiplication: `[[k·m]] = [[m]]^k`.
    pub fn scale(&self, k: &BigUint, pp: &PublicParams) -> Ciphertext {
        let n2 = pp.n_squared();
        Ciphertext { c1: self.c1.modpow(k, n2), c2: self.c2.modpow(k, n2), domain: self.domain }
    }

    /// `[[−m]] = [[m]]^{N−1}`.
    pub fn negate(&self, pp: &PublicParams) -> Ciphertext {
        self.scale(&(pp.n() - 1u32), pp)
    }

    /// `len(C1) ‖ C1 ‖ len(C2) ‖ C2 ‖ domain`, lengths as 4-byte big-endian.
    /// The domain is a 1-byte tag followed by the 2-byte key id(s).
    pub fn encode(&self, out: &mut Vec<u8>) {
        put_biguint(out, &self.c1);
        put_biguint(out, &self.c2);
        self.domain.encode(out);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let c1 = r.biguint()?;
        let c2 = r.biguint()?;
        let domain = KeyDomain::decode(r)?;
        Ok(Self { c1, c2, domain })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let ct = Self::decode(&mut r)?;
        r.finish()?;
        Ok(ct)
    }
}
