use std::fmt;

use num_bigint::BigUint;

use crate::keygen::PublicParams;
use crate::wire::{put_biguint, put_u16, put_u8, Reader};
use crate::{CryptoError, Result};

/// Identifies the owner of a weak key pair. Protocol layers use the party id.
pub type KeyId = u16;

/// The key(s) whose secret parts are needed to decrypt a ciphertext.
///
/// Joint domains are stored with the smaller id first, so two joint domains
/// over the same pair compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyDomain {
    Single(KeyId),
    Joint(KeyId, KeyId),
    /// A single-key ciphertext whose exponent was shifted by one or more
    /// secret refresh values; no weak key decrypts it any more.
    Refreshed(KeyId),
}

impl KeyDomain {
    pub fn joint(a: KeyId, b: KeyId) -> Self {
        KeyDomain::Joint(a.min(b), a.max(b))
    }

    pub fn contains(&self, id: KeyId) -> bool {
        match *self {
            KeyDomain::Single(k) | KeyDomain::Refreshed(k) => k == id,
            KeyDomain::Joint(a, b) => a == id || b == id,
        }
    }

    /// The remaining single-key domain once `id` has been stripped.
    pub fn without(&self, id: KeyId) -> Option<KeyDomain> {
        match *self {
            KeyDomain::Joint(a, b) if a == id => Some(KeyDomain::Single(b)),
            KeyDomain::Joint(a, b) if b == id => Some(KeyDomain::Single(a)),
            _ => None,
        }
    }

    pub(crate) fn encode(&self, out: &mut Vec<u8>) {
        match *self {
            KeyDomain::Single(k) => {
                put_u8(out, 0);
                put_u16(out, k);
            }
            KeyDomain::Joint(a, b) => {
                put_u8(out, 1);
                put_u16(out, a);
                put_u16(out, b);
            }
            KeyDomain::Refreshed(k) => {
                put_u8(out, 2);
                put_u16(out, k);
            }
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self> {
        match r.u8()? {
            0 => Ok(KeyDomain::Single(r.u16()?)),
            1 => {
                let a = r.u16()?;
                let b = r.u16()?;
                Ok(KeyDomain::joint(a, b))
            }
            2 => Ok(KeyDomain::Refreshed(r.u16()?)),
            t => Err(CryptoError::Decode(format!("unknown key-domain tag {t}"))),
        }
    }
}

impl fmt::Display for KeyDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyDomain::Single(k) => write!(f, "pk{k}"),
            KeyDomain::Joint(a, b) => write!(f, "pk{a}+pk{b}"),
            KeyDomain::Refreshed(k) => write!(f, "refreshed(pk{k})"),
        }
    }
}

/// `h = g^sk mod N²` for a single key, or the product of the parts for a
/// joint key (which is the public key of `sk_a + sk_b`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PublicKey {
    domain: KeyDomain,
    h: BigUint,
}

impl PublicKey {
    pub fn new(domain: KeyDomain, h: BigUint) -> Self {
        Self { domain, h }
    }

    pub fn domain(&self) -> KeyDomain {
        self.domain
    }

    pub fn h(&self) -> &BigUint {
        &self.h
    }

    /// `pk_a + pk_b`. Both inputs must be single keys.
    pub fn combine(pp: &PublicParams, a: &PublicKey, b: &PublicKey) -> Result<PublicKey> {
        match (a.domain, b.domain) {
            (KeyDomain::Single(x), KeyDomain::Single(y)) => Ok(PublicKey {
                domain: KeyDomain::joint(x, y),
                h: (&a.h * &b.h) % pp.n_squared(),
            }),
            (KeyDomain::Single(_), other) | (other, _) => {
                Err(CryptoError::DomainMisuse { op: "combine public keys", domain: other })
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.domain.encode(&mut out);
        put_biguint(&mut out, &self.h);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let domain = KeyDomain::decode(&mut r)?;
        let h = r.biguint()?;
        r.finish()?;
        Ok(Self { domain, h })
    }
}

/// A weak private key, drawn from `[1, N/4]`.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    id: KeyId,
    x: BigUint,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey").field("id", &self.id).finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn new(id: KeyId, x: BigUint) -> Self {
        Self { id, x }
    }

    pub fn id(&self) -> KeyId {
        self.id
    }

    pub fn exponent(&self) -> &BigUint {
        &self.x
    }

    pub fn public_key(&self, pp: &PublicParams) -> PublicKey {
        PublicKey {
            domain: KeyDomain::Single(self.id),
            h: pp.g().modpow(&self.x, pp.n_squared()),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_u16(&mut out, self.id);
        put_biguint(&mut out, &self.x);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let id = r.u16()?;
        let x = r.biguint()?;
        r.finish()?;
        Ok(Self { id, x })
    }
}

macro_rules! strong_share {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name(BigUint);

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(concat!(stringify!($name), "(..)"))
            }
        }

        impl $name {
            pub fn new(value: BigUint) -> Self {
                Self(value)
            }

            pub fn value(&self) -> &BigUint {
                &self.0
            }

            /// `c1^λᵢ mod N²`.
            pub fn partial(&self, pp: &PublicParams, c1: &BigUint) -> BigUint {
                c1.modpow(&self.0, pp.n_squared())
            }

            pub fn to_bytes(&self) -> Vec<u8> {
                let mut out = Vec::new();
                put_biguint(&mut out, &self.0);
                out
            }

            pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
                let mut r = Reader::new(bytes);
                let v = r.biguint()?;
                r.finish()?;
                Ok(Self(v))
            }
        }
    };
}

strong_share!(CsShare, "The first strong-key share λ1, held by the center server.");
strong_share!(CcShare, "The second strong-key share λ2, held by the computation provider.");

/// `C1` together with the center server's partial `C1^λ1`; the computation
/// provider completes the strong decryption with λ2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongPartial {
    pub c1: BigUint,
    pub p1: BigUint,
}

impl StrongPartial {
    pub fn encode(&self, out: &mut Vec<u8>) {
        put_biguint(out, &self.c1);
        put_biguint(out, &self.p1);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self { c1: r.biguint()?, p1: r.biguint()? })
    }
}
