use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use revfrf_forest::Task;

use crate::dataset::DatasetSpec;
use crate::{CliError, Result};

/// Uniform features in `[0, 1)`; the label depends only on the first
/// `informative` of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub rows: usize,
    pub features: usize,
    pub informative: usize,
    pub task: Task,
    /// Classification: probability of flipping each label. Regression:
    /// half-width of uniform additive noise.
    pub noise: f64,
    pub seed: u64,
}

/// Classification labels are `1` iff the mean of the informative features
/// exceeds `0.5`; regression labels are `Σ_j (j + 1) · x_j` over them.
pub fn synth_dataset(cfg: SynthConfig) -> Result<DatasetSpec> {
    if cfg.rows < 10 {
        return Err(CliError::Validation(format!("{} rows; at least 10 are required", cfg.rows)));
    }
    if cfg.informative == 0 || cfg.informative > cfg.features {
        return Err(CliError::Validation(format!(
            "{} informative features out of {}",
            cfg.informative, cfg.features
        )));
    }
    if !(cfg.noise >= 0.0) || (cfg.task == Task::Classification && cfg.noise > 1.0) {
        return Err(CliError::Validation(format!("noise {} out of range", cfg.noise)));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.rows);
    let mut labels = Vec::with_capacity(cfg.rows);
    for _ in 0..cfg.rows {
        let row: Vec<f64> = (0..cfg.features).map(|_| (rng.gen::<f64>() * 1e4).floor() / 1e4).collect();
        let signal = &row[..cfg.informative];
        let y = match cfg.task {
            Task::Classification => {
                let mut class = signal.iter().sum::<f64>() / cfg.informative as f64 > 0.5;
                if cfg.noise > 0.0 && rng.gen_bool(cfg.noise) {
                    class = !class;
                }
                class as u8 as f64
            }
            Task::Regression => {
                let clean: f64 = signal.iter().enumerate().map(|(j, x)| (j + 1) as f64 * x).sum();
                clean + if cfg.noise > 0.0 { rng.gen_range(-cfg.noise..cfg.noise) } else { 0.0 }
            }
        };
        rows.push(row);
        labels.push(y);
    }
    Ok(DatasetSpec {
        rows,
        labels,
        feature_names: (0..cfg.features).map(|f| format!("x{f}")).collect(),
        task: cfg.task,
        num_classes: if cfg.task == Task::Classification { 2 } else { 0 },
    })
}
