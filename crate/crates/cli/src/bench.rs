//! Cost measurements over the simulated transport.

use std::ops::RangeInclusive;

use revfrf_crypto::KeyGenCenter;
use revfrf_federation::{EncryptedForest, Federation, FederationSetup, RevocationLevel, FIRST_PARTICIPANT};
use revfrf_forest::{FeatureSubset, FixedGrid, Hyperparams, Task};
use revfrf_transport::{Counters, DeliveryOrder, PartyId, Primitive, Stage};

use crate::partition::PartitionPlan;
use crate::synth::{synth_dataset, SynthConfig};
use crate::Result;

/// A synthetic regression federation: uniform features at four decimal
/// digits, one participant per `features / participants` block.
#[derive(Debug, Clone)]
pub struct BenchFederation {
    pub setup: FederationSetup,
    pub test_rows: Vec<Vec<i64>>,
}

impl BenchFederation {
    pub fn new(keys: &KeyGenCenter, rows: usize, features: usize, participants: usize, params: Hyperparams, seed: u64) -> Result<Self> {
        let data = synth_dataset(SynthConfig {
            rows: rows + 8,
            features,
            informative: features.min(3),
            task: Task::Regression,
            noise: 0.1,
            seed,
        })?;
        let (train, test) = data.split(8.0 / (rows + 8) as f64, seed)?;
        let grid = FixedGrid::new(params.scale_digits);
        let plan = PartitionPlan::contiguous(features, participants)?;
        let setup = FederationSetup {
            keys: keys.clone(),
            params,
            task: Task::Regression,
            num_classes: 0,
            labels: train.labels.clone(),
            participants: plan.slice(&train.quantized_columns(grid), &test.quantized_columns(grid)),
            seed,
            delivery: DeliveryOrder::SendOrder,
        };
        Ok(Self { setup, test_rows: test.quantized_rows(grid) })
    }

    pub fn federation(&self) -> Result<Federation> {
        Ok(Federation::setup(self.setup.clone())?)
    }

    pub fn participants(&self) -> Vec<PartyId> {
        self.setup.participants.iter().map(|p| p.id).collect()
    }
}

fn bench_params(trees: usize, depth: u32) -> Hyperparams {
    Hyperparams {
        max_trees: trees,
        max_depth: depth,
        feature_subset: FeatureSubset::Sqrt,
        scale_digits: 4,
        ..Hyperparams::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub trees: usize,
    pub depth: u32,
    pub visited: usize,
    pub holt: u64,
    pub par_h_dec1: u64,
    pub par_h_dec2: u64,
    pub bytes: u64,
}

/// Prediction cost of one row for every `(t, d)` in the grid. One forest
/// is trained at the largest limits and truncated for smaller ones, which
/// per-node seeding makes identical to training each separately.
pub fn prediction_sweep(
    keys: &KeyGenCenter,
    trees: RangeInclusive<usize>,
    depths: RangeInclusive<u32>,
    rows: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let (t_max, d_max) = (*trees.end(), *depths.end());
    let features = d_max as usize + 2;
    let bench = BenchFederation::new(keys, rows, features, 3, bench_params(t_max, d_max), seed)?;
    let mut fed = bench.federation()?;
    let full: EncryptedForest = fed.train()?.clone();
    let requester = FIRST_PARTICIPANT;
    let mut points = Vec::new();
    for t in trees {
        for d in depths.clone() {
            let mut fed = bench.federation()?;
            fed.install_forest(full.truncated(t, d))?;
            let prediction = fed.predict(requester, &bench.test_rows[0])?;
            let stage = fed.ledger().stage_total(Stage::Prediction);
            points.push(SweepPoint {
                trees: t,
                depth: d,
                visited: prediction.visited,
                holt: stage.ops(Primitive::HoLT),
                par_h_dec1: stage.ops(Primitive::ParHDec1),
                par_h_dec2: stage.ops(Primitive::ParHDec2),
                bytes: stage.bytes_sent,
            });
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    LinearFit { slope, intercept, r2: 1.0 - sse / syy }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevocationCost {
    pub party: PartyId,
    pub total_nodes: usize,
    pub destroyed_nodes: usize,
    /// Ledger totals of the revocation stage.
    pub revocation: Counters,
    /// Ledger totals of training from scratch without the party.
    pub retrain: Counters,
}

impl RevocationCost {
    pub fn byte_ratio(&self) -> f64 {
        self.retrain.bytes_sent as f64 / self.revocation.bytes_sent.max(1) as f64
    }

    pub fn op_ratio(&self) -> f64 {
        self.retrain.total_ops() as f64 / self.revocation.total_ops().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RevocationBench {
    pub participants: usize,
    pub depth: u32,
    pub trees: usize,
    pub rows: usize,
    pub seed: u64,
    pub level: RevocationLevel,
}

/// Revokes each participant in turn from the same trained forest and
/// compares the revocation's ledger cost with retraining without it. Every
/// participant holds one feature.
pub fn rebuild_vs_retrain(keys: &KeyGenCenter, cfg: RevocationBench, parties: Option<&[PartyId]>) -> Result<Vec<RevocationCost>> {
    let params = Hyperparams { max_trees: cfg.trees, max_depth: cfg.depth, ..bench_params(cfg.trees, cfg.depth) };
    let bench = BenchFederation::new(keys, cfg.rows, cfg.participants, cfg.participants, params, cfg.seed)?;
    let forest = bench.federation()?.train()?.clone();
    let all = bench.participants();
    let mut out = Vec::new();
    for &party in parties.unwrap_or(&all) {
        let mut fed = bench.federation()?;
        fed.install_forest(forest.clone())?;
        let request = fed.revocation_request(party, 1)?;
        let report = fed.revoke(party, request, cfg.level)?;
        let revocation = fed.ledger().stage_total(Stage::Revocation);

        let mut fresh = bench.federation()?;
        fresh.replay_revocations(&[party])?;
        fresh.train()?;
        let retrain = fresh.ledger().stage_total(Stage::Construction);
        out.push(RevocationCost {
            party,
            total_nodes: forest.node_count(),
            destroyed_nodes: report.destroyed_nodes,
            revocation,
            retrain,
        });
    }
    Ok(out)
}
