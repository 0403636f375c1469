#![allow(dead_code)]

//! Brute-force metric oracles shared by the metric tests and acceptance.

/// Counting oracle: binary uses class 1 as positive; multiclass averages
/// one-vs-rest over the classes that occur.
pub fn oracle_classification(p: &[usize], t: &[usize], k: usize) -> (f64, f64, f64) {
    let counts = |c: usize| {
        let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        for i in 0..p.len() {
            if p[i] == c && t[i] == c {
                tp += 1;
            } else if p[i] == c {
                fp += 1;
            } else if t[i] == c {
                fn_ += 1;
            } else {
                tn += 1;
            }
        }
        (tp, fp, tn, fn_)
    };
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    if k == 2 {
        let (tp, fp, tn, fn_) = counts(1);
        return (div(tp + tn, tp + tn + fp + fn_), div(tp, tp + fn_), div(2 * tp, 2 * tp + fp + fn_));
    }
    let acc = div(p.iter().zip(t).filter(|(a, b)| a == b).count() as u64, p.len() as u64);
    let classes: Vec<usize> = (0..k).filter(|c| p.contains(c) || t.contains(c)).collect();
    let (mut rr, mut f1) = (0.0, 0.0);
    for &c in &classes {
        let (tp, fp, _, fn_) = counts(c);
        rr += div(tp, tp + fn_);
        f1 += div(2 * tp, 2 * tp + fp + fn_);
    }
    (acc, rr / classes.len() as f64, f1 / classes.len() as f64)
}

pub fn oracle_regression(p: &[f64], y: &[f64]) -> (f64, f64, Option<f64>, Option<f64>) {
    let n = p.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    for i in 0..p.len() {
        sse += (y[i] - p[i]) * (y[i] - p[i]);
        sae += (y[i] - p[i]).abs();
    }
    let mean_p = p.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut den_p = 0.0;
    let mut den_y = 0.0;
    for i in 0..p.len() {
        den_p += (mean_p - p[i]) * (mean_p - p[i]);
        den_y += (y[i] - mean_y) * (y[i] - mean_y);
    }
    let r2 = |d: f64| if d > 0.0 { Some(1.0 - sse / d) } else { None };
    (sse / n, sae / n, r2(den_p), r2(den_y))
}
