//! Sample-selection and split vectors, and their compact wire forms.

use crate::{ForestError, Result};

/// `1` if `x > 0`, else `0`.
pub fn sign(x: f64) -> u8 {
    (x > 0.0) as u8
}

/// Rows on the `+1` side, rows on the `−1` side; `0` rows go nowhere.
pub fn partition<T: Clone>(w: &[i8], rows: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if w.len() != rows.len() {
        return Err(ForestError::LengthMismatch { expected: w.len(), got: rows.len() });
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (&wi, row) in w.iter().zip(rows) {
        match wi.signum() {
            1 => plus.push(row.clone()),
            -1 => minus.push(row.clone()),
            _ => {}
        }
    }
    Ok((plus, minus))
}

/// Child selection vectors: `(Sign(w), Sign(−w))`.
pub fn child_masks(w: &[i8]) -> (Vec<bool>, Vec<bool>) {
    (w.iter().map(|&x| x > 0).collect(), w.iter().map(|&x| x < 0).collect())
}

pub fn selected(mu: &[bool]) -> impl Iterator<Item = usize> + '_ {
    mu.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
}

/// One bit per entry, most significant bit first.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Result<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(ForestError::Decode(format!("{} bytes cannot hold exactly {len} bits", bytes.len())));
    }
    Ok((0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

/// Two bits per entry: `00` = 0, `01` = +1, `10` = −1.
pub fn pack_trits(w: &[i8]) -> Vec<u8> {
    let mut out = vec![0u8; w.len().div_ceil(4)];
    for (i, &x) in w.iter().enumerate() {
        let code = match x.signum() {
            1 => 0b01,
            -1 => 0b10,
            _ => 0b00,
        };
        out[i / 4] |= code << (6 - 2 * (i % 4));
    }
    out
}

pub fn unpack_trits(bytes: &[u8], len: usize) -> Result<Vec<i8>> {
    if bytes.len() != len.div_ceil(4) {
        return Err(ForestError::Decode(format!("{} bytes cannot hold exactly {len} split entries", bytes.len())));
    }
    (0..len)
        .map(|i| match (bytes[i / 4] >> (6 - 2 * (i % 4))) & 0b11 {
            0b00 => Ok(0),
            0b01 => Ok(1),
            0b10 => Ok(-1),
            _ => Err(ForestError::Decode(format!("invalid split entry at {i}"))),
        })
        .collect()
}
