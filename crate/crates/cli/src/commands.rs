//! The work behind each command-line verb.
//!
//! Verbs share state through the output directory: `params.bin` from
//! `keygen`, `forest.bin` from `train`, and `revoked.txt` listing revoked
//! participants in order.

use std::path::{Path, PathBuf};

use revfrf_federation::{montecarlo, EncryptedForest, Federation, Prediction, RevocationLevel, RevocationReport};
use revfrf_transport::{CostLedger, PartyId};

use crate::bench::{linear_fit, prediction_sweep, rebuild_vs_retrain, RevocationBench};
use crate::config::ExperimentConfig;
use crate::experiment::{evaluate, generate_keys, run_experiment, write_ledger, write_metrics, ExperimentReport, Prepared};
use crate::metrics::{MetricsOptions, MetricsReport};
use crate::synth::{synth_dataset, SynthConfig};
use crate::{CliError, Result};

pub const PARAMS_FILE: &str = "params.bin";
pub const FOREST_FILE: &str = "forest.bin";
pub const REVOKED_FILE: &str = "revoked.txt";

fn out_dir(config: &ExperimentConfig) -> Result<&Path> {
    let dir = config.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeygenSummary {
    pub modulus_bits: u32,
    pub r1_bits: u32,
}

pub fn keygen(config: &ExperimentConfig) -> Result<KeygenSummary> {
    let keys = generate_keys(config)?;
    let path = out_dir(config)?.join(PARAMS_FILE);
    std::fs::write(&path, keys.params().to_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(KeygenSummary { modulus_bits: keys.params().modulus_bits(), r1_bits: keys.params().r1_bits() })
}

/// Keys are a deterministic function of the configuration; when `keygen`
/// has run, its public parameters must match.
fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let keys = generate_keys(config)?;
    let path = config.output_dir.join(PARAMS_FILE);
    if let Ok(saved) = std::fs::read(&path) {
        if saved != keys.params().to_bytes() {
            return Err(CliError::Validation(format!("{} was generated with a different key configuration", path.display())));
        }
    }
    Prepared::with_keys(config.clone(), keys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainSummary {
    pub trees: usize,
    pub nodes: usize,
    pub splits: usize,
}

pub fn train(config: &ExperimentConfig) -> Result<TrainSummary> {
    let prepared = prepare(config)?;
    let mut fed = prepared.federation()?;
    let forest = fed.train()?;
    let summary = TrainSummary { trees: forest.trees.len(), nodes: forest.node_count(), splits: forest.internal_count() };
    let dir = out_dir(config)?;
    forest.save(dir.join(FOREST_FILE))?;
    let revoked = dir.join(REVOKED_FILE);
    std::fs::write(&revoked, "").map_err(|e| CliError::io(&revoked, e))?;
    write_ledger(dir.join("ledger-train.csv"), fed.ledger())?;
    Ok(summary)
}

/// A federation restored from the output directory.
pub struct Session {
    pub prepared: Prepared,
    pub fed: Federation,
    pub revoked: Vec<PartyId>,
    restored: CostLedger,
}

impl Session {
    pub fn open(config: &ExperimentConfig) -> Result<Self> {
        let prepared = prepare(config)?;
        let dir = &config.output_dir;
        let forest_path = dir.join(FOREST_FILE);
        if !forest_path.exists() {
            return Err(CliError::Validation(format!("{} not found; run train first", forest_path.display())));
        }
        let forest = EncryptedForest::load(&forest_path)?;
        let revoked = read_revoked(&dir.join(REVOKED_FILE))?;
        let mut fed = prepared.federation()?;
        fed.replay_revocations(&revoked)?;
        fed.install_forest(forest)?;
        let restored = fed.ledger().clone();
        Ok(Self { prepared, fed, revoked, restored })
    }

    /// Ledger entries since the session was restored.
    pub fn ledger(&self) -> CostLedger {
        self.fed.ledger().since(&self.restored)
    }
}

fn read_revoked(path: &Path) -> Result<Vec<PartyId>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().map_err(|_| CliError::Validation(format!("{}: bad participant id {l:?}", path.display()))))
        .collect()
}

pub fn predict(config: &ExperimentConfig, requester: PartyId, values: &[f64]) -> Result<Prediction> {
    let mut session = Session::open(config)?;
    let row = session.prepared.params.grid().quantize_column(values);
    let prediction = session.fed.predict(requester, &row)?;
    write_ledger(config.output_dir.join("ledger-predict.csv"), &session.ledger())?;
    Ok(prediction)
}

pub fn test(config: &ExperimentConfig, options: MetricsOptions) -> Result<MetricsReport> {
    let mut session = Session::open(config)?;
    let (predictions, metrics) = evaluate(&mut session.fed, &session.prepared.test, options)?;
    let dir = &config.output_dir;
    let run = format!("revoked-{}", session.revoked.len());
    let rows: Vec<_> = metrics.rows().into_iter().map(|(m, v)| (run.clone(), m.to_owned(), v)).collect();
    write_metrics(dir.join("metrics-test.csv"), &rows)?;
    write_predictions(&dir.join("predictions.csv"), &predictions, &session.prepared.test.labels)?;
    write_ledger(dir.join("ledger-test.csv"), &session.ledger())?;
    Ok(metrics)
}

fn write_predictions(path: &Path, predictions: &[f64], truths: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(["row", "prediction", "truth"]).map_err(|e| CliError::io(path, e))?;
    for (i, (p, t)) in predictions.iter().zip(truths).enumerate() {
        w.write_record([i.to_string(), p.to_string(), t.to_string()]).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn revoke(config: &ExperimentConfig, party: PartyId, level: Option<RevocationLevel>) -> Result<RevocationReport> {
    let level = match level {
        Some(l) => l,
        None => config.level()?,
    };
    let mut session = Session::open(config)?;
    let nonce = session.revoked.len() as u64 + 1;
    let request = session.fed.revocation_request(party, nonce)?;
    let report = session.fed.revoke(party, request, level)?;
    let dir = &config.output_dir;
    session.fed.forest().expect("installed when the session opened").save(dir.join(FOREST_FILE))?;
    session.revoked.push(party);
    let listing: String = session.revoked.iter().map(|p| format!("{p}\n")).collect();
    let path = dir.join(REVOKED_FILE);
    std::fs::write(&path, listing).map_err(|e| CliError::io(&path, e))?;
    write_ledger(dir.join("ledger-revoke.csv"), &session.ledger())?;
    Ok(report)
}

pub fn experiment(config: &ExperimentConfig, options: MetricsOptions) -> Result<ExperimentReport> {
    let report = run_experiment(config, options)?;
    report.write(out_dir(config)?)?;
    Ok(report)
}

pub fn synth(cfg: SynthConfig, path: &Path) -> Result<usize> {
    let data = synth_dataset(cfg)?;
    data.write_csv(path, "y")?;
    Ok(data.num_rows())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub prime_bits: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub sweep_rows: usize,
    pub revocation_rows: usize,
    pub revocation_trees: usize,
    pub forests: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            prime_bits: 128,
            seed: 1,
            out: PathBuf::from("revfrf-bench"),
            sweep_rows: 2048,
            revocation_rows: 2048,
            revocation_trees: 2,
            forests: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSummary {
    /// `R²` of prediction bytes on `trees · depth`.
    pub prediction_r2: f64,
    pub destroyed_fraction: f64,
    pub mean_byte_ratio: f64,
    pub mean_op_ratio: f64,
}

/// Prediction-cost sweep over `t ∈ 1..=10, d ∈ 2..=10`, rebuild-versus-
/// retrain costs with 14 single-feature participants at depth 10, and the
/// destroyed-node simulation; each written as CSV.
pub fn bench(options: &BenchOptions) -> Result<BenchSummary> {
    let out = options.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let keys = revfrf_crypto::KeyGenCenter::generate(revfrf_crypto::KeyGenConfig::with_prime_bits(options.prime_bits), options.seed)?;

    let sweep = prediction_sweep(&keys, 1..=10, 2..=10, options.sweep_rows, options.seed)?;
    let xs: Vec<f64> = sweep.iter().map(|p| (p.trees * p.depth as usize) as f64).collect();
    let ys: Vec<f64> = sweep.iter().map(|p| p.bytes as f64).collect();
    let fit = linear_fit(&xs, &ys);
    let mut rows = Vec::new();
    for p in &sweep {
        let id = format!("t{}-d{}", p.trees, p.depth);
        for (m, v) in [("visited", p.visited as u64), ("holt", p.holt), ("bytes", p.bytes)] {
            rows.push((id.clone(), m.to_owned(), v as f64));
        }
    }
    rows.push(("fit".into(), "r2".into(), fit.r2));
    rows.push(("fit".into(), "bytes_per_td".into(), fit.slope));
    write_metrics(out.join("bench-prediction.csv"), &rows)?;

    let cfg = RevocationBench {
        participants: 14,
        depth: 10,
        trees: options.revocation_trees,
        rows: options.revocation_rows,
        seed: options.seed,
        level: RevocationLevel::Forward,
    };
    let costs = rebuild_vs_retrain(&keys, cfg, None)?;
    let mut rows = Vec::new();
    for c in &costs {
        let id = format!("revoke-{}", c.party);
        rows.push((id.clone(), "destroyed_nodes".into(), c.destroyed_nodes as f64));
        rows.push((id.clone(), "total_nodes".into(), c.total_nodes as f64));
        rows.push((id.clone(), "revocation_bytes".into(), c.revocation.bytes_sent as f64));
        rows.push((id.clone(), "retrain_bytes".into(), c.retrain.bytes_sent as f64));
        rows.push((id.clone(), "revocation_ops".into(), c.revocation.total_ops() as f64));
        rows.push((id, "retrain_ops".into(), c.retrain.total_ops() as f64));
    }
    let mean = |f: fn(&crate::bench::RevocationCost) -> f64| costs.iter().map(f).sum::<f64>() / costs.len() as f64;
    let (byte_ratio, op_ratio) = (mean(|c| c.byte_ratio()), mean(|c| c.op_ratio()));

    let sim = montecarlo::simulate(montecarlo::RevocationSim {
        participants: 14,
        depth: 10,
        trees: 1,
        forests: options.forests,
        seed: options.seed,
    });
    rows.push(("simulation".into(), "mean_destroyed".into(), sim.mean_destroyed));
    rows.push(("simulation".into(), "std_error".into(), sim.std_error));
    rows.push(("simulation".into(), "expected_destroyed".into(), sim.expected));
    rows.push(("simulation".into(), "depth_times_revoked".into(), sim.depth_times_revoked));
    rows.push(("simulation".into(), "total_nodes".into(), sim.total_nodes as f64));
    rows.push(("summary".into(), "mean_byte_ratio".into(), byte_ratio));
    rows.push(("summary".into(), "mean_op_ratio".into(), op_ratio));
    write_metrics(out.join("bench-revocation.csv"), &rows)?;

    Ok(BenchSummary {
        prediction_r2: fit.r2,
        destroyed_fraction: sim.destroyed_fraction(),
        mean_byte_ratio: byte_ratio,
        mean_op_ratio: op_ratio,
    })
}
