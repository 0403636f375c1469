//! Split-quality scores. Lower is better for both.

use crate::params::Task;

fn mean(ys: &[f64]) -> f64 {
    ys.iter().sum::<f64>() / ys.len() as f64
}

fn mse_term(ys: &[f64]) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let m = mean(ys);
    ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / ys.len() as f64
}

/// Unweighted sum of the two children's mean squared errors. An empty child
/// contributes 0.
pub fn mse_score(d1: &[f64], d2: &[f64]) -> f64 {
    mse_term(d1) + mse_term(d2)
}

fn gini_term(classes: &[usize], k: usize) -> f64 {
    if classes.is_empty() || k <= 1 {
        return 0.0;
    }
    let mut counts = vec![0usize; k];
    for &c in classes {
        counts[c.min(k - 1)] += 1;
    }
    let n = classes.len() as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Sum of the two children's Gini impurities `1 − Σ_j p_j²`.
pub fn gini_score(d1: &[usize], d2: &[usize], k: usize) -> f64 {
    gini_term(d1, k) + gini_term(d2, k)
}

/// A scored candidate. Ordering puts splits with two non-empty children
/// first, then lower scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub score: f64,
    pub empty_child: bool,
    /// No selected row at all: this candidate cannot split anything.
    pub degenerate: bool,
}

impl CandidateScore {
    pub fn better_than(&self, other: &CandidateScore) -> bool {
        if self.degenerate != other.degenerate {
            return !self.degenerate;
        }
        if self.empty_child != other.empty_child {
            return !self.empty_child;
        }
        self.score < other.score
    }
}

/// Labels known to the scorer (the center server in the federation).
#[derive(Debug, Clone)]
pub struct LabelView<'a> {
    pub task: Task,
    pub labels: &'a [f64],
    pub num_classes: usize,
}

impl LabelView<'_> {
    pub fn score(&self, w: &[i8]) -> CandidateScore {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, &wi) in w.iter().enumerate() {
            match wi.signum() {
                1 => plus.push(i),
                -1 => minus.push(i),
                _ => {}
            }
        }
        let score = match self.task {
            Task::Regression => {
                let a: Vec<f64> = plus.iter().map(|&i| self.labels[i]).collect();
                let b: Vec<f64> = minus.iter().map(|&i| self.labels[i]).collect();
                mse_score(&a, &b)
            }
            Task::Classification => {
                let a: Vec<usize> = plus.iter().map(|&i| self.labels[i] as usize).collect();
                let b: Vec<usize> = minus.iter().map(|&i| self.labels[i] as usize).collect();
                gini_score(&a, &b, self.num_classes)
            }
        };
        CandidateScore {
            score,
            empty_child: plus.is_empty() || minus.is_empty(),
            degenerate: plus.is_empty() && minus.is_empty(),
        }
    }
}

/// Index of the best candidate; the first one wins ties. `None` if there
/// are no candidates or every candidate is degenerate.
pub fn best_candidate(scores: &[CandidateScore]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if s.degenerate {
            continue;
        }
        if best.is_none_or(|b| s.better_than(&scores[b])) {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_mse(ys: &[f64]) -> f64 {
        if ys.is_empty() {
            return 0.0;
        }
        let n = ys.len() as f64;
        let m = ys.iter().sum::<f64>() / n;
        ys.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / n
    }

    fn brute_gini(cs: &[usize], k: usize) -> f64 {
        if cs.is_empty() {
            return 0.0;
        }
        let n = cs.len() as f64;
        let mut s = 0.0;
        for j in 0..k {
            let p = cs.iter().filter(|&&c| c == j).count() as f64 / n;
            s += p * p;
        }
        1.0 - s
    }

    #[test]
    fn worked_examples() {
        assert_eq!(mse_score(&[2.0, 2.0], &[5.0, 5.0]), 0.0);
        assert_eq!(mse_score(&[0.0, 2.0], &[10.0]), 1.0);
        assert_eq!(mse_score(&[10.0], &[0.0, 2.0]), 1.0);
        assert_eq!(gini_score(&[0, 0], &[1], 2), 0.0);
        assert_eq!(gini_score(&[0, 1], &[], 2), 0.5);
        assert_eq!(gini_score(&[0, 0, 0], &[0], 1), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn scorers_match_brute_force(
            a in prop::collection::vec(-50i32..50, 0..12),
            b in prop::collection::vec(-50i32..50, 0..12),
            k in 1usize..5,
        ) {
            let fa: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            let fb: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            let m = mse_score(&fa, &fb);
            prop_assert!((m - (brute_mse(&fa) + brute_mse(&fb))).abs() < 1e-9);
            let ca: Vec<usize> = a.iter().map(|&x| x.unsigned_abs() as usize % k).collect();
            let cb: Vec<usize> = b.iter().map(|&x| x.unsigned_abs() as usize % k).collect();
            let g = gini_score(&ca, &cb, k);
            prop_assert!((g - (brute_gini(&ca, k) + brute_gini(&cb, k))).abs() < 1e-12);
            prop_assert!((gini_score(&cb, &ca, k) - g).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_split_wins_and_ties_go_first() {
        let labels = [0.0, 0.0, 1.0, 1.0];
        let view = LabelView { task: Task::Classification, labels: &labels, num_classes: 2 };
        let mixed = view.score(&[1, -1, 1, -1]);
        let pure = view.score(&[-1, -1, 1, 1]);
        assert_eq!(best_candidate(&[mixed, pure]), Some(1));
        assert_eq!(best_candidate(&[pure, pure]), Some(0));
        let one_sided = view.score(&[1, 1, 1, 1]);
        assert!(one_sided.empty_child);
        assert_eq!(one_sided.score, 0.5);
        assert_eq!(best_candidate(&[one_sided, mixed]), Some(1));
        let none = view.score(&[0, 0, 0, 0]);
        assert_eq!(best_candidate(&[none]), None);
        assert_eq!(best_candidate(&[]), None);
    }
}
