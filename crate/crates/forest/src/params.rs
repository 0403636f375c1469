use crate::{ForestError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Regression,
    Classification,
}

impl Task {
    pub fn code(self) -> u8 {
        match self {
            Task::Regression => 0,
            Task::Classification => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Task::Regression),
            1 => Ok(Task::Classification),
            c => Err(ForestError::Decode(format!("unknown task code {c}"))),
        }
    }
}

/// How many of the remaining features a node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubset {
    /// `⌈√|F′|⌉`.
    Sqrt,
    All,
    Fixed(usize),
}

impl FeatureSubset {
    pub fn size(self, available: usize) -> usize {
        let k = match self {
            FeatureSubset::Sqrt => (available as f64).sqrt().ceil() as usize,
            FeatureSubset::All => available,
            FeatureSubset::Fixed(k) => k,
        };
        k.clamp(1, available.max(1)).min(available)
    }

    pub(crate) fn code(self) -> (u8, u32) {
        match self {
            FeatureSubset::Sqrt => (0, 0),
            FeatureSubset::All => (1, 0),
            FeatureSubset::Fixed(k) => (2, k as u32),
        }
    }

    pub(crate) fn from_code(tag: u8, k: u32) -> Result<Self> {
        match tag {
            0 => Ok(FeatureSubset::Sqrt),
            1 => Ok(FeatureSubset::All),
            2 => Ok(FeatureSubset::Fixed(k as usize)),
            t => Err(ForestError::Decode(format!("unknown feature-subset rule {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub max_trees: usize,
    pub max_depth: u32,
    /// Thresholds proposed per feature (ς).
    pub split_count: usize,
    /// Rows sampled to find a feature's range (ϱ).
    pub range_sample: usize,
    pub feature_subset: FeatureSubset,
    /// Per-tree row subsampling without replacement; `None` uses every row.
    pub row_fraction: Option<f64>,
    /// Decimal digits kept when quantizing feature values.
    pub scale_digits: u32,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            max_trees: 100,
            max_depth: 10,
            split_count: 10,
            range_sample: 64,
            feature_subset: FeatureSubset::Sqrt,
            row_fraction: None,
            scale_digits: 6,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.split_count == 0 {
            return Err(ForestError::InvalidParams("split_count must be at least 1".into()));
        }
        if self.range_sample == 0 {
            return Err(ForestError::InvalidParams("range_sample must be at least 1".into()));
        }
        if let FeatureSubset::Fixed(0) = self.feature_subset {
            return Err(ForestError::InvalidParams("fixed feature subset must be at least 1".into()));
        }
        if let Some(f) = self.row_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ForestError::InvalidParams(format!("row_fraction {f} outside (0, 1]")));
            }
        }
        if self.scale_digits > 15 {
            return Err(ForestError::InvalidParams("scale_digits above 15 exceeds f64 precision".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> FixedGrid {
        FixedGrid::new(self.scale_digits)
    }
}

/// Quantization shared by every party: `round(x · 10^c)` as a signed integer.
/// Thresholds and comparisons live entirely in this integer space, so the
/// encrypted comparison and the plaintext walk always agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedGrid {
    scale_digits: u32,
}

impl FixedGrid {
    pub fn new(scale_digits: u32) -> Self {
        Self { scale_digits }
    }

    pub fn scale_digits(&self) -> u32 {
        self.scale_digits
    }

    fn factor(&self) -> f64 {
        10f64.powi(self.scale_digits as i32)
    }

    pub fn quantize(&self, x: f64) -> i64 {
        (x * self.factor()).round() as i64
    }

    pub fn quantize_column(&self, column: &[f64]) -> Vec<i64> {
        column.iter().map(|&x| self.quantize(x)).collect()
    }

    pub fn to_real(&self, ticks: i64) -> f64 {
        ticks as f64 / self.factor()
    }
}
