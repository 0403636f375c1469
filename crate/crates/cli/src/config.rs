//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 1
//! output_dir = "revfrf-out"
//!
//! [dataset]
//! task = "classification"      # or "regression"
//! test_fraction = 0.25
//! csv = "data.csv"             # or a [dataset.synth] table
//! label = "y"
//! categorical = ["colour"]
//!
//! [partition]
//! participants = 3
//! strategy = "round-robin"     # or "contiguous", or an explicit
//!                              # [partition.owners] table: "3" = [0, 2]
//!
//! [params]
//! trees = 100
//! depth = 10
//! split_count = 10
//! range_sample = 64
//! feature_subset = "sqrt"      # "all", or a fixed count
//! scale_digits = 6
//!
//! [keys]
//! prime_bits = 512
//!
//! [revocation]
//! level = 1
//! schedule = [3, 4]            # or sweep = 2: the first two participants
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use revfrf_crypto::KeyGenConfig;
use revfrf_federation::{RevocationLevel, FIRST_PARTICIPANT};
use revfrf_forest::{FeatureSubset, Hyperparams, Task};
use revfrf_transport::PartyId;

use crate::dataset::CsvSchema;
use crate::partition::PartitionPlan;
use crate::synth::SynthConfig;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub partition: PartitionConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub keys: KeysConfig,
    #[serde(default)]
    pub revocation: RevocationConfig,
}

fn one() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("revfrf-out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskName {
    Classification,
    Regression,
}

impl From<TaskName> for Task {
    fn from(t: TaskName) -> Self {
        match t {
            TaskName::Classification => Task::Classification,
            TaskName::Regression => Task::Regression,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub task: TaskName,
    #[serde(default = "quarter")]
    pub test_fraction: f64,
    pub csv: Option<PathBuf>,
    pub label: Option<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    pub synth: Option<SynthTable>,
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthTable {
    pub rows: usize,
    pub features: usize,
    #[serde(default = "one_usize")]
    pub informative: usize,
    #[serde(default)]
    pub noise: f64,
}

fn one_usize() -> usize {
    1
}

/// Where the rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv { path: PathBuf, schema: CsvSchema },
    Synth(SynthConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    RoundRobin,
    Contiguous,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub participants: Option<usize>,
    pub strategy: Option<Strategy>,
    pub owners: Option<BTreeMap<String, Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SubsetRule {
    Named(String),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub trees: usize,
    pub depth: u32,
    pub split_count: usize,
    pub range_sample: usize,
    pub feature_subset: SubsetRule,
    pub row_fraction: Option<f64>,
    pub scale_digits: u32,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let h = Hyperparams::default();
        Self {
            trees: h.max_trees,
            depth: h.max_depth,
            split_count: h.split_count,
            range_sample: h.range_sample,
            feature_subset: SubsetRule::Named("sqrt".into()),
            row_fraction: h.row_fraction,
            scale_digits: h.scale_digits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeysConfig {
    /// Bits per prime factor of the modulus.
    pub prime_bits: usize,
    /// Key generation seed; the experiment seed when absent.
    pub seed: Option<u64>,
}

impl Default for KeysConfig {
    fn default() -> Self {
        Self { prime_bits: KeyGenConfig::default().prime_bits, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RevocationConfig {
    pub level: u8,
    pub schedule: Vec<PartyId>,
    /// Revoke the first `sweep` participants when no schedule is given.
    pub sweep: usize,
}

impl Default for RevocationConfig {
    fn default() -> Self {
        Self { level: 1, schedule: Vec::new(), sweep: 0 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(csv) = &mut cfg.dataset.csv {
            if csv.is_relative() {
                *csv = base.join(&*csv);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Everything that can be checked without touching data.
    pub fn validate(&self) -> Result<()> {
        self.source()?;
        self.hyperparams()?;
        self.level()?;
        let p = &self.partition;
        if p.owners.is_some() && (p.participants.is_some() || p.strategy.is_some()) {
            return Err(CliError::Validation("partition: give either owners or participants/strategy".into()));
        }
        if p.owners.is_none() && p.participants.is_none() {
            return Err(CliError::Validation("partition: participants or owners required".into()));
        }
        if !self.revocation.schedule.is_empty() && self.revocation.sweep > 0 {
            return Err(CliError::Validation("revocation: give either schedule or sweep".into()));
        }
        if self.keys.prime_bits < 16 {
            return Err(CliError::Validation(format!("keys: prime_bits {} is too small", self.keys.prime_bits)));
        }
        Ok(())
    }

    pub fn source(&self) -> Result<DataSource> {
        let d = &self.dataset;
        match (&d.csv, &d.synth) {
            (Some(path), None) => {
                let label = d
                    .label
                    .clone()
                    .ok_or_else(|| CliError::Validation("dataset: csv needs a label column".into()))?;
                Ok(DataSource::Csv {
                    path: path.clone(),
                    schema: CsvSchema { label, task: d.task.into(), categorical: d.categorical.clone() },
                })
            }
            (None, Some(s)) => {
                if d.label.is_some() || !d.categorical.is_empty() {
                    return Err(CliError::Validation("dataset: label/categorical apply to csv input only".into()));
                }
                Ok(DataSource::Synth(SynthConfig {
                    rows: s.rows,
                    features: s.features,
                    informative: s.informative,
                    task: d.task.into(),
                    noise: s.noise,
                    seed: self.seed,
                }))
            }
            _ => Err(CliError::Validation("dataset: exactly one of csv or synth is required".into())),
        }
    }

    pub fn hyperparams(&self) -> Result<Hyperparams> {
        let p = &self.params;
        let feature_subset = match &p.feature_subset {
            SubsetRule::Named(n) if n == "sqrt" => FeatureSubset::Sqrt,
            SubsetRule::Named(n) if n == "all" => FeatureSubset::All,
            SubsetRule::Fixed(k) => FeatureSubset::Fixed(*k),
            SubsetRule::Named(n) => return Err(CliError::Validation(format!("params: unknown feature_subset {n:?}"))),
        };
        let h = Hyperparams {
            max_trees: p.trees,
            max_depth: p.depth,
            split_count: p.split_count,
            range_sample: p.range_sample,
            feature_subset,
            row_fraction: p.row_fraction,
            scale_digits: p.scale_digits,
        };
        h.validate().map_err(|e| CliError::Validation(format!("params: {e}")))?;
        Ok(h)
    }

    pub fn level(&self) -> Result<RevocationLevel> {
        RevocationLevel::from_number(self.revocation.level)
            .ok_or_else(|| CliError::Validation(format!("revocation: level {} is not 1 or 2", self.revocation.level)))
    }

    pub fn key_config(&self) -> Result<KeyGenConfig> {
        Ok(KeyGenConfig { scale_digits: self.hyperparams()?.scale_digits, ..KeyGenConfig::with_prime_bits(self.keys.prime_bits) })
    }

    pub fn key_seed(&self) -> u64 {
        self.keys.seed.unwrap_or(self.seed)
    }

    pub fn plan(&self, num_features: usize) -> Result<PartitionPlan> {
        let p = &self.partition;
        if let Some(owners) = &p.owners {
            let parsed = owners
                .iter()
                .map(|(k, v)| {
                    k.parse::<PartyId>()
                        .map(|id| (id, v.clone()))
                        .map_err(|_| CliError::Validation(format!("partition: owner {k:?} is not a participant id")))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            return PartitionPlan::new(parsed, num_features);
        }
        let n = p.participants.expect("checked in validate");
        match p.strategy.unwrap_or(Strategy::RoundRobin) {
            Strategy::RoundRobin => PartitionPlan::round_robin(num_features, n),
            Strategy::Contiguous => PartitionPlan::contiguous(num_features, n),
        }
    }

    /// Participants to revoke, in order.
    pub fn schedule(&self, plan: &PartitionPlan) -> Result<Vec<PartyId>> {
        let r = &self.revocation;
        let schedule: Vec<PartyId> = if r.sweep > 0 {
            (0..r.sweep as PartyId).map(|i| FIRST_PARTICIPANT + i).collect()
        } else {
            r.schedule.clone()
        };
        let known: Vec<PartyId> = plan.participants().collect();
        for (i, p) in schedule.iter().enumerate() {
            if !known.contains(p) || schedule[..i].contains(p) {
                return Err(CliError::Validation(format!("revocation: participant {p} is unknown or repeated")));
            }
        }
        if schedule.len() >= known.len() {
            return Err(CliError::Validation("revocation: at least one participant must remain".into()));
        }
        Ok(schedule)
    }
}
