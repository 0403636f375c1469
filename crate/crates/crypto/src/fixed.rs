//! Signed fixed-point reals as residues modulo N.
//!
//! A real `x` becomes `x̂ = round(x·10^c) mod N`. Non-negative values occupy
//! `[0, R1)` and negative values `(N − R1, N)`; everything in between is
//! rejected so that the comparison protocol can never wrap.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::keygen::PublicParams;
use crate::{CryptoError, Result};

/// A residue known to lie in one of the two legal ranges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    raw: BigUint,
}

fn scaled_ticks(x: f64, scale_digits: u32) -> Result<BigInt> {
    let scaled = (x * 10f64.powi(scale_digits as i32)).round();
    BigInt::from_f64(scaled).ok_or_else(|| CryptoError::FixedPointRange { value: x.to_string(), r1_bits: 0 })
}

fn to_residue(ticks: &BigInt, n: &BigUint) -> BigUint {
    let n = BigInt::from_biguint(Sign::Plus, n.clone());
    let r = ((ticks % &n) + &n) % &n;
    r.to_biguint().expect("non-negative after reduction")
}

/// `round(x·10^c) mod N` with no range check.
pub fn scale_to_residue(x: f64, scale_digits: u32, n: &BigUint) -> Result<BigUint> {
    Ok(to_residue(&scaled_ticks(x, scale_digits)?, n))
}

impl FixedPoint {
    /// Encodes an already-scaled signed integer.
    pub fn from_ticks(ticks: &BigInt, pp: &PublicParams) -> Result<Self> {
        if ticks.abs() >= BigInt::from(pp.r1()) {
            return Err(CryptoError::FixedPointRange { value: ticks.to_string(), r1_bits: pp.r1_bits() });
        }
        Ok(Self { raw: to_residue(ticks, pp.n()) })
    }

    pub fn encode(x: f64, pp: &PublicParams) -> Result<Self> {
        let ticks = scaled_ticks(x, pp.scale_digits()).map_err(|_| CryptoError::FixedPointRange {
            value: x.to_string(),
            r1_bits: pp.r1_bits(),
        })?;
        Self::from_ticks(&ticks, pp).map_err(|_| CryptoError::FixedPointRange {
            value: x.to_string(),
            r1_bits: pp.r1_bits(),
        })
    }

    /// Interprets a decrypted residue; fails in the forbidden middle band.
    pub fn from_raw(raw: BigUint, pp: &PublicParams) -> Result<Self> {
        let r1 = pp.r1();
        if raw >= *pp.n() || (raw >= r1 && raw <= pp.n() - &r1) {
            return Err(CryptoError::FixedPointRange { value: raw.to_string(), r1_bits: pp.r1_bits() });
        }
        Ok(Self { raw })
    }

    pub fn raw(&self) -> &BigUint {
        &self.raw
    }

    pub fn into_raw(self) -> BigUint {
        self.raw
    }

    /// The signed scaled integer `x̂`.
    pub fn ticks(&self, pp: &PublicParams) -> BigInt {
        if self.raw < pp.r1() {
            BigInt::from(self.raw.clone())
        } else {
            BigInt::from(self.raw.clone()) - BigInt::from(pp.n().clone())
        }
    }

    pub fn decode(&self, pp: &PublicParams) -> f64 {
        let ticks = self.ticks(pp);
        if ticks.is_zero() {
            return 0.0;
        }
        ticks.to_f64().unwrap_or(f64::NAN) / 10f64.powi(pp.scale_digits() as i32)
    }
}

pub fn fixed_encode(x: f64, pp: &PublicParams) -> Result<FixedPoint> {
    FixedPoint::encode(x, pp)
}

pub fn fixed_decode(v: &FixedPoint, pp: &PublicParams) -> f64 {
    v.decode(pp)
}
