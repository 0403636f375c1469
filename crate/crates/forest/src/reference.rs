//! Centralized trainer with every column and the labels in one place.
//!
//! It makes exactly the random choices the federated protocol makes (see
//! [`crate::seed`]) and therefore serves as its ground truth: same feature
//! subsets, same range subsamples, same winning thresholds.

use std::collections::BTreeSet;

use rand::seq::index::sample;

use crate::params::{Hyperparams, Task};
use crate::score::{best_candidate, LabelView};
use crate::seed::{self, NodeKey};
use crate::splits::recommend_splits;
use crate::select::child_masks;
use crate::tree::{leaf_weight, weight_of, Forest, Node, NodeKind, PlainForest, Split};
use crate::{ForestError, Result};

/// Quantized training data. `owners[f]` is the participant holding column
/// `f`; it decides candidate order and the provider recorded on each split.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub columns: &'a [Vec<i64>],
    pub labels: &'a [f64],
    pub owners: &'a [u16],
    pub task: Task,
    pub num_classes: usize,
}

impl TrainingData<'_> {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    fn validate(&self) -> Result<()> {
        if self.labels.is_empty() || self.columns.is_empty() {
            return Err(ForestError::EmptyDataset);
        }
        if self.owners.len() != self.columns.len() {
            return Err(ForestError::LengthMismatch { expected: self.columns.len(), got: self.owners.len() });
        }
        for c in self.columns {
            if c.len() != self.labels.len() {
                return Err(ForestError::LengthMismatch { expected: self.labels.len(), got: c.len() });
            }
        }
        Ok(())
    }

    fn view(&self) -> LabelView<'_> {
        LabelView { task: self.task, labels: self.labels, num_classes: self.num_classes }
    }

    /// Weight of the whole training set; the fallback above every root.
    pub fn global_weight(&self) -> f64 {
        leaf_weight(self.labels, self.task).unwrap_or(0.0)
    }
}

/// Root selection vector of tree `tree`: every row, or a seeded subsample.
pub fn root_selection(rows: usize, params: &Hyperparams, seed: u64, tree: u32) -> Vec<bool> {
    match params.row_fraction {
        None => vec![true; rows],
        Some(frac) => {
            let k = ((rows as f64 * frac).round() as usize).clamp(1, rows);
            let mut mu = vec![false; rows];
            for i in sample(&mut seed::tree_rows(seed, 0, tree), rows, k) {
                mu[i] = true;
            }
            mu
        }
    }
}

/// The features a node examines: `⌈√|F′|⌉` of them (per the configured
/// rule), drawn from the node's stream and ordered by `(owner, feature)`.
pub fn feature_subset(features: &[usize], owners: &[u16], params: &Hyperparams, seed: u64, key: NodeKey) -> Vec<usize> {
    let k = params.feature_subset.size(features.len());
    let mut rng = seed::node_features(seed, key);
    let mut chosen: Vec<usize> = sample(&mut rng, features.len(), k).into_iter().map(|i| features[i]).collect();
    chosen.sort_by_key(|&f| (owners[f], f));
    chosen
}

struct Builder<'a> {
    data: TrainingData<'a>,
    params: &'a Hyperparams,
    seed: u64,
}

impl Builder<'_> {
    fn expand(&self, mu: Vec<bool>, features: Vec<usize>, depth: u32, key: NodeKey, fallback: f64) -> Result<Node<i64>> {
        let weight = weight_of(self.data.labels, &mu, self.data.task, fallback);
        let any_row = mu.iter().any(|&m| m);
        if depth > self.params.max_depth || features.is_empty() || !any_row {
            return Ok(Node::leaf(depth, mu, features, weight, key.epoch));
        }
        let view = self.data.view();
        let mut candidates = Vec::new();
        let mut scores = Vec::new();
        for f in feature_subset(&features, self.data.owners, self.params, self.seed, key) {
            let mut rng = seed::feature_range(self.seed, key, f);
            let (set, vectors) = recommend_splits(
                f,
                &self.data.columns[f],
                &mu,
                self.params.range_sample,
                self.params.split_count,
                &mut rng,
            )?;
            for (t, w) in set.thresholds.into_iter().zip(vectors) {
                scores.push(view.score(&w));
                candidates.push((f, t, w));
            }
        }
        let Some(best) = best_candidate(&scores) else {
            return Ok(Node::leaf(depth, mu, features, weight, key.epoch));
        };
        let (feature, threshold, w0) = candidates.swap_remove(best);
        let remaining: Vec<usize> = features.iter().copied().filter(|&f| f != feature).collect();
        let (left_mu, right_mu) = child_masks(&w0);
        let left = self.expand(left_mu, remaining.clone(), depth + 1, key.left(), weight)?;
        let right = self.expand(right_mu, remaining, depth + 1, key.right(), weight)?;
        Ok(Node {
            depth,
            mu,
            features,
            weight,
            epoch: key.epoch,
            kind: NodeKind::Internal {
                split: Split { payload: threshold, provider: self.data.owners[feature], feature, w0 },
                left: Box::new(left),
                right: Box::new(right),
            },
        })
    }
}

pub fn train_reference_forest(data: TrainingData<'_>, params: &Hyperparams, seed: u64) -> Result<PlainForest> {
    data.validate()?;
    params.validate()?;
    let builder = Builder { data, params, seed };
    let all: Vec<usize> = (0..data.columns.len()).collect();
    let fallback = data.global_weight();
    let trees = (0..params.max_trees as u32)
        .map(|t| {
            let mu = root_selection(data.rows(), params, seed, t);
            builder.expand(mu, all.clone(), 1, NodeKey::root(0, t), fallback)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest { task: data.task, params: *params, num_classes: data.num_classes, num_features: data.columns.len(), trees })
}

/// What one revocation pass did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RebuildReport {
    /// Nodes removed, counting each destroyed subtree in full.
    pub destroyed_nodes: usize,
    /// Internal nodes removed: the splits that had ciphertexts.
    pub destroyed_splits: usize,
    pub rebuilt_nodes: usize,
    /// Indices of trees with at least one rebuilt subtree.
    pub trees: BTreeSet<usize>,
}

/// Rebuilds, in place, every subtree rooted at a split provided by
/// `revoked`, treating the columns of everyone in `excluded` (which must
/// contain `revoked`) as absent.
pub fn revoke_reference(
    forest: &mut PlainForest,
    data: TrainingData<'_>,
    revoked: u16,
    excluded: &BTreeSet<u16>,
    epoch: u32,
    seed: u64,
) -> Result<RebuildReport> {
    data.validate()?;
    let params = forest.params;
    let builder = Builder { data, params: &params, seed };
    let mut report = RebuildReport::default();
    let fallback = data.global_weight();
    for (t, tree) in forest.trees.iter_mut().enumerate() {
        let before = report.destroyed_nodes;
        rebuild(&builder, tree, revoked, excluded, NodeKey::root(epoch, t as u32), fallback, &mut report)?;
        if report.destroyed_nodes > before {
            report.trees.insert(t);
        }
    }
    Ok(report)
}

fn rebuild(
    builder: &Builder<'_>,
    node: &mut Node<i64>,
    revoked: u16,
    excluded: &BTreeSet<u16>,
    key: NodeKey,
    fallback: f64,
    report: &mut RebuildReport,
) -> Result<()> {
    let hit = node.split().is_some_and(|s| s.provider == revoked) && node.epoch < key.epoch;
    if hit {
        report.destroyed_nodes += node.node_count();
        report.destroyed_splits += node.internal_count();
        let features: Vec<usize> =
            node.features.iter().copied().filter(|&f| !excluded.contains(&builder.data.owners[f])).collect();
        *node = builder.expand(std::mem::take(&mut node.mu), features, node.depth, key, fallback)?;
        report.rebuilt_nodes += node.node_count();
        return Ok(());
    }
    let weight = node.weight;
    if let NodeKind::Internal { left, right, .. } = &mut node.kind {
        rebuild(builder, left, revoked, excluded, key.left(), weight, report)?;
        rebuild(builder, right, revoked, excluded, key.right(), weight, report)?;
    }
    Ok(())
}
