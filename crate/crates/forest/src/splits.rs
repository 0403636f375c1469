//! Candidate thresholds proposed by a feature owner.

use rand::seq::index::sample;
use rand::Rng;

use crate::select::selected;
use crate::{ForestError, Result};

/// Thresholds for one feature, in quantized units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSplitSet {
    pub feature: usize,
    pub thresholds: Vec<i64>,
    /// `(min, max)` of the range subsample.
    pub range: (i64, i64),
}

/// `count` evenly spaced points on `[lo, hi]`, both ends included, rounded
/// to the nearest unit. One point is the midpoint; a flat range gives `lo`.
pub fn even_thresholds(lo: i64, hi: i64, count: usize) -> Vec<i64> {
    if lo == hi {
        return vec![lo];
    }
    let (lo128, span) = (lo as i128, hi as i128 - lo as i128);
    if count == 1 {
        return vec![(lo128 + span.div_euclid(2)) as i64];
    }
    let steps = count as i128 - 1;
    (0..count as i128)
        .map(|i| {
            // round(i·span/steps), span ≥ 0
            let num = 2 * i * span + steps;
            (lo128 + num.div_euclid(2 * steps)) as i64
        })
        .collect()
}

/// `−1` where the value is at or below the threshold, `+1` above, `0` for
/// rows outside the selection.
pub fn split_vector(column: &[i64], mu: &[bool], threshold: i64) -> Vec<i8> {
    column
        .iter()
        .zip(mu)
        .map(|(&x, &m)| match (m, x > threshold) {
            (false, _) => 0,
            (true, true) => 1,
            (true, false) => -1,
        })
        .collect()
}

/// Draws up to `range_sample` selected rows, spans their range with
/// `split_count` thresholds, and returns one split vector per threshold.
pub fn recommend_splits<R: Rng + ?Sized>(
    feature: usize,
    column: &[i64],
    mu: &[bool],
    range_sample: usize,
    split_count: usize,
    rng: &mut R,
) -> Result<(CandidateSplitSet, Vec<Vec<i8>>)> {
    if column.len() != mu.len() {
        return Err(ForestError::LengthMismatch { expected: mu.len(), got: column.len() });
    }
    let rows: Vec<usize> = selected(mu).collect();
    if rows.is_empty() {
        return Err(ForestError::InvalidParams("no selected rows to propose splits from".into()));
    }
    let picked: Vec<usize> = if rows.len() <= range_sample {
        rows
    } else {
        let mut idx = sample(rng, rows.len(), range_sample).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| rows[i]).collect()
    };
    let lo = picked.iter().map(|&i| column[i]).min().expect("nonempty");
    let hi = picked.iter().map(|&i| column[i]).max().expect("nonempty");
    let thresholds = even_thresholds(lo, hi, split_count);
    let vectors = thresholds.iter().map(|&t| split_vector(column, mu, t)).collect();
    Ok((CandidateSplitSet { feature, thresholds, range: (lo, hi) }, vectors))
}
