//! Loading an experiment, running the federation over it, and reporting.

use std::path::Path;

use revfrf_crypto::KeyGenCenter;
use revfrf_federation::{Federation, FederationSetup, RevocationReport};
use revfrf_forest::{Hyperparams, TrainingData};
use revfrf_transport::{CostLedger, DeliveryOrder, PartyId};

use crate::config::{DataSource, ExperimentConfig};
use crate::dataset::{ingest_csv, DatasetSpec};
use crate::metrics::{compute_metrics, MetricsOptions, MetricsReport};
use crate::partition::PartitionPlan;
use crate::synth::synth_dataset;
use crate::{CliError, Result};

/// A configured experiment with its data split, partitioned and quantized.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub params: Hyperparams,
    pub train: DatasetSpec,
    pub test: DatasetSpec,
    pub plan: PartitionPlan,
    pub keys: KeyGenCenter,
    /// Column-major quantized values.
    pub train_columns: Vec<Vec<i64>>,
    pub test_columns: Vec<Vec<i64>>,
    /// Rows the ingestion dropped.
    pub dropped: usize,
}

pub fn load_dataset(config: &ExperimentConfig) -> Result<(DatasetSpec, usize)> {
    match config.source()? {
        DataSource::Csv { path, schema } => {
            let ingested = ingest_csv(&path, &schema)?;
            if ingested.dropped > 0 {
                log::warn!("{}: dropped {} rows", path.display(), ingested.dropped);
            }
            Ok((ingested.dataset, ingested.dropped))
        }
        DataSource::Synth(cfg) => Ok((synth_dataset(cfg)?, 0)),
    }
}

pub fn generate_keys(config: &ExperimentConfig) -> Result<KeyGenCenter> {
    Ok(KeyGenCenter::generate(config.key_config()?, config.key_seed())?)
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let keys = generate_keys(&config)?;
        Self::with_keys(config, keys)
    }

    pub fn with_keys(config: ExperimentConfig, keys: KeyGenCenter) -> Result<Self> {
        config.validate()?;
        let params = config.hyperparams()?;
        let (data, dropped) = load_dataset(&config)?;
        let (train, test) = data.split(config.dataset.test_fraction, config.seed)?;
        let plan = config.plan(data.num_features())?;
        let grid = params.grid();
        let train_columns = train.quantized_columns(grid);
        let test_columns = test.quantized_columns(grid);
        // Comparisons need every value inside the signed plaintext range.
        let limit = 1i128 << keys.params().r1_bits();
        let widest = train_columns.iter().chain(&test_columns).flatten().map(|&v| (v as i128).abs()).max().unwrap_or(0);
        if widest >= limit {
            return Err(CliError::Validation(format!(
                "a feature quantizes to {widest}, beyond ±2^{} at this key size; lower scale_digits or raise prime_bits",
                keys.params().r1_bits()
            )));
        }
        Ok(Self { config, params, train, test, plan, keys, train_columns, test_columns, dropped })
    }

    pub fn setup(&self) -> FederationSetup {
        FederationSetup {
            keys: self.keys.clone(),
            params: self.params,
            task: self.train.task,
            num_classes: self.train.num_classes,
            labels: self.train.labels.clone(),
            participants: self.plan.slice(&self.train_columns, &self.test_columns),
            seed: self.config.seed,
            delivery: DeliveryOrder::SendOrder,
        }
    }

    pub fn federation(&self) -> Result<Federation> {
        Ok(Federation::setup(self.setup())?)
    }

    /// The training data as one centralized table, for reference runs.
    pub fn owners(&self) -> Vec<PartyId> {
        self.plan.owners()
    }

    pub fn training_data<'a>(&'a self, owners: &'a [PartyId]) -> TrainingData<'a> {
        TrainingData {
            columns: &self.train_columns,
            labels: &self.train.labels,
            owners,
            task: self.train.task,
            num_classes: self.train.num_classes,
        }
    }

    /// Row-major quantized test rows.
    pub fn test_rows(&self) -> Vec<Vec<i64>> {
        self.test.quantized_rows(self.params.grid())
    }
}

/// Scores the federation's forest on every test row through the
/// distributed test protocol.
pub fn evaluate(fed: &mut Federation, test: &DatasetSpec, options: MetricsOptions) -> Result<(Vec<f64>, MetricsReport)> {
    let predictions = (0..fed.test_rows()).map(|r| Ok(fed.test(r)?.value)).collect::<Result<Vec<f64>>>()?;
    let metrics = compute_metrics(&predictions, &test.labels, test.task, test.num_classes, options)?;
    Ok((predictions, metrics))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub run_id: String,
    pub revoked: Vec<PartyId>,
    pub metrics: MetricsReport,
    pub revocation: Option<RevocationReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunReport>,
    pub ledger: CostLedger,
}

/// Trains once, then revokes the scheduled participants one after another,
/// scoring the forest before the first and after every revocation.
pub fn run_experiment(config: &ExperimentConfig, options: MetricsOptions) -> Result<ExperimentReport> {
    let prepared = Prepared::new(config.clone())?;
    let schedule = config.schedule(&prepared.plan)?;
    let level = config.level()?;
    let mut fed = prepared.federation()?;
    fed.train()?;
    let mut runs = Vec::new();
    let (_, metrics) = evaluate(&mut fed, &prepared.test, options)?;
    runs.push(RunReport { run_id: "revoked-0".into(), revoked: Vec::new(), metrics, revocation: None });
    for (i, &party) in schedule.iter().enumerate() {
        let request = fed.revocation_request(party, i as u64 + 1)?;
        let report = fed.revoke(party, request, level)?;
        let (_, metrics) = evaluate(&mut fed, &prepared.test, options)?;
        runs.push(RunReport {
            run_id: format!("revoked-{}", i + 1),
            revoked: schedule[..=i].to_vec(),
            metrics,
            revocation: Some(report),
        });
    }
    Ok(ExperimentReport { runs, ledger: fed.ledger().clone() })
}

impl ExperimentReport {
    /// `(run_id, metric, value)` rows.
    pub fn metric_rows(&self) -> Vec<(String, String, f64)> {
        let mut rows = Vec::new();
        for run in &self.runs {
            for (m, v) in run.metrics.rows() {
                rows.push((run.run_id.clone(), m.to_owned(), v));
            }
            rows.push((run.run_id.clone(), "revoked_participants".into(), run.revoked.len() as f64));
            if let Some(r) = &run.revocation {
                rows.push((run.run_id.clone(), "revoked_party".into(), r.party as f64));
                rows.push((run.run_id.clone(), "destroyed_nodes".into(), r.destroyed_nodes as f64));
                rows.push((run.run_id.clone(), "destroyed_splits".into(), r.destroyed_splits as f64));
                rows.push((run.run_id.clone(), "rebuilt_nodes".into(), r.rebuilt_nodes as f64));
                rows.push((run.run_id.clone(), "rebuilt_trees".into(), r.trees.len() as f64));
                rows.push((run.run_id.clone(), "refreshed_splits".into(), r.refreshed as f64));
            }
        }
        rows
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_metrics(dir.join("metrics.csv"), &self.metric_rows())?;
        write_ledger(dir.join("ledger.csv"), &self.ledger)
    }
}

pub fn write_metrics(path: impl AsRef<Path>, rows: &[(String, String, f64)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(["run_id", "metric", "value"]).map_err(|e| CliError::io(path, e))?;
    for (run, metric, value) in rows {
        w.write_record([run.as_str(), metric.as_str(), &value.to_string()]).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_ledger(path: impl AsRef<Path>, ledger: &CostLedger) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(ledger.write_csv(file)?)
}
