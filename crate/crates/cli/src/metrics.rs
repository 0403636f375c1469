//! Evaluation metrics.
//!
//! Classification metrics are for the positive class `1` when there are at
//! most two classes, and macro-averaged one-vs-rest otherwise (accuracy is
//! plain agreement either way). Regression reports `R²` with the
//! denominator taken around the mean prediction,
//! `1 − Σ(y − ŷ)² / Σ(ȳ_pred − ŷ)²`, and optionally the conventional form
//! around the mean truth.

use revfrf_forest::Task;

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricsReport {
    Classification {
        accuracy: f64,
        recall: f64,
        f1: f64,
    },
    Regression {
        mse: f64,
        mae: f64,
        /// `None` when every prediction is identical.
        r2: Option<f64>,
        /// Only when requested; `None` when every truth is identical.
        r2_standard: Option<Option<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricsOptions {
    pub standard_r2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn one_vs_rest(predictions: &[usize], truths: &[usize], class: usize) -> Self {
        let mut c = Confusion::default();
        for (&p, &t) in predictions.iter().zip(truths) {
            match (p == class, t == class) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

/// `0` for an empty denominator.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(
    predictions: &[f64],
    truths: &[f64],
    task: Task,
    num_classes: usize,
    options: MetricsOptions,
) -> Result<MetricsReport> {
    if predictions.len() != truths.len() {
        return Err(CliError::Validation(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(CliError::Validation("no predictions to score".into()));
    }
    Ok(match task {
        Task::Classification => classification(predictions, truths, num_classes),
        Task::Regression => regression(predictions, truths, options),
    })
}

fn class_of(y: f64) -> usize {
    y.round().max(0.0) as usize
}

fn classification(predictions: &[f64], truths: &[f64], num_classes: usize) -> MetricsReport {
    let p: Vec<usize> = predictions.iter().map(|&y| class_of(y)).collect();
    let t: Vec<usize> = truths.iter().map(|&y| class_of(y)).collect();
    let seen = p.iter().chain(&t).max().map_or(0, |&m| m + 1);
    let k = num_classes.max(seen);
    if k <= 2 {
        let c = Confusion::one_vs_rest(&p, &t, 1);
        return MetricsReport::Classification { accuracy: c.accuracy(), recall: c.recall(), f1: c.f1() };
    }
    let correct = p.iter().zip(&t).filter(|(a, b)| a == b).count();
    let present: Vec<usize> = (0..k).filter(|c| p.contains(c) || t.contains(c)).collect();
    let per: Vec<Confusion> = present.iter().map(|&c| Confusion::one_vs_rest(&p, &t, c)).collect();
    let mean = |f: fn(&Confusion) -> f64| per.iter().map(f).sum::<f64>() / per.len() as f64;
    MetricsReport::Classification {
        accuracy: correct as f64 / p.len() as f64,
        recall: mean(Confusion::recall),
        f1: mean(Confusion::f1),
    }
}

fn regression(predictions: &[f64], truths: &[f64], options: MetricsOptions) -> MetricsReport {
    let n = predictions.len() as f64;
    let sse: f64 = predictions.iter().zip(truths).map(|(p, y)| (y - p).powi(2)).sum();
    let mae = predictions.iter().zip(truths).map(|(p, y)| (y - p).abs()).sum::<f64>() / n;
    let spread = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    let r2 = |den: f64| (den > 0.0).then(|| 1.0 - sse / den);
    MetricsReport::Regression {
        mse: sse / n,
        mae,
        r2: r2(spread(predictions)),
        r2_standard: options.standard_r2.then(|| r2(spread(truths))),
    }
}

impl MetricsReport {
    /// `(metric, value)` pairs; undefined values are `NaN`.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        match *self {
            MetricsReport::Classification { accuracy, recall, f1 } => {
                vec![("acc", accuracy), ("rr", recall), ("f1", f1)]
            }
            MetricsReport::Regression { mse, mae, r2, r2_standard } => {
                let mut rows = vec![("mse", mse), ("mae", mae), ("r2", r2.unwrap_or(f64::NAN))];
                if let Some(s) = r2_standard {
                    rows.push(("r2_standard", s.unwrap_or(f64::NAN)));
                }
                rows
            }
        }
    }

    /// The headline number: accuracy or MSE.
    pub fn primary(&self) -> f64 {
        match *self {
            MetricsReport::Classification { accuracy, .. } => accuracy,
            MetricsReport::Regression { mse, .. } => mse,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_confusion() {
        let c = Confusion { tp: 8, tn: 2, fp: 1, fn_: 1 };
        assert_eq!(c.accuracy(), 10.0 / 12.0);
        assert_eq!(c.recall(), 8.0 / 9.0);
        assert_eq!(c.f1(), 16.0 / 18.0);
    }

    #[test]
    fn constant_prediction_has_no_printed_r2() {
        let truths = [1.0, 2.0, 3.0];
        let m = compute_metrics(&[2.0; 3], &truths, Task::Regression, 0, MetricsOptions { standard_r2: true }).unwrap();
        let MetricsReport::Regression { r2, r2_standard, .. } = m else { panic!() };
        assert_eq!(r2, None);
        assert_eq!(r2_standard, Some(Some(0.0)));
    }
}
