//! How much of a forest one revocation destroys, by simulation.
//!
//! Trees are complete binary trees with `depth` levels of splits and a level
//! of leaves below; each split's provider is drawn uniformly from the
//! participants. Revoking one participant destroys every subtree rooted at
//! one of its splits, leaves included.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RevocationSim {
    pub participants: usize,
    pub depth: u32,
    pub trees: usize,
    pub forests: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevocationSimReport {
    /// Mean destroyed nodes per tree, over every simulated tree.
    pub mean_destroyed: f64,
    /// Standard error of `mean_destroyed`, taken over per-forest means.
    pub std_error: f64,
    pub total_nodes: u64,
    /// Exact expectation under uniform ownership.
    pub expected: f64,
    /// `depth · revoked`, the per-tree closed form that ignores ownership
    /// probability; reported for comparison only.
    pub depth_times_revoked: f64,
}

impl RevocationSimReport {
    pub fn destroyed_fraction(&self) -> f64 {
        self.mean_destroyed / self.total_nodes as f64
    }

    /// Distance of the simulated mean from the exact expectation, in
    /// standard errors.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            return if self.mean_destroyed == self.expected { 0.0 } else { f64::INFINITY };
        }
        (self.mean_destroyed - self.expected) / self.std_error
    }
}

/// Nodes in a complete tree with `depth` split levels.
pub fn total_nodes(depth: u32) -> u64 {
    (1u64 << (depth + 1)) - 1
}

/// Expected destroyed nodes per tree: a node survives iff none of the
/// splits on its root path (itself included, if it is a split) belongs to
/// the revoked participant.
pub fn expected_destroyed(participants: usize, depth: u32) -> f64 {
    let keep = 1.0 - 1.0 / participants as f64;
    let splits: f64 = (0..depth).map(|i| 2f64.powi(i as i32) * (1.0 - keep.powi(i as i32 + 1))).sum();
    splits + 2f64.powi(depth as i32) * (1.0 - keep.powi(depth as i32))
}

/// Destroyed nodes in one tree whose splits, in heap order, have the given
/// providers.
fn destroyed(providers: &[usize], revoked: usize, depth: u32) -> u64 {
    let mut count = 0;
    let mut stack = vec![(0usize, 0u32)];
    while let Some((i, level)) = stack.pop() {
        if providers[i] == revoked {
            count += total_nodes(depth - level);
        } else if level + 1 < depth {
            stack.push((2 * i + 1, level + 1));
            stack.push((2 * i + 2, level + 1));
        }
    }
    count
}

pub fn simulate(sim: RevocationSim) -> RevocationSimReport {
    assert!(sim.participants > 0 && sim.trees > 0 && sim.forests > 1 && sim.depth > 0 && sim.depth < 32);
    let mut rng = ChaCha20Rng::seed_from_u64(sim.seed);
    let splits = (1usize << sim.depth) - 1;
    let mut providers = vec![0; splits];
    let mut means = Vec::with_capacity(sim.forests);
    for _ in 0..sim.forests {
        let revoked = rng.gen_range(0..sim.participants);
        let mut sum = 0;
        for _ in 0..sim.trees {
            for p in providers.iter_mut() {
                *p = rng.gen_range(0..sim.participants);
            }
            sum += destroyed(&providers, revoked, sim.depth);
        }
        means.push(sum as f64 / sim.trees as f64);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    RevocationSimReport {
        mean_destroyed: mean,
        std_error: (var / n).sqrt(),
        total_nodes: total_nodes(sim.depth),
        expected: expected_destroyed(sim.participants, sim.depth),
        depth_times_revoked: sim.depth as f64,
    }
}
