//! Named random streams.
//!
//! Every random decision in tree construction draws from a generator keyed
//! by `(master seed, purpose, epoch, tree, node, feature)`. The centralized
//! trainer and the federated protocol derive the same keys, so they make the
//! same choices without sharing any generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Per-tree row subsample.
    Rows = 1,
    /// Feature subset at a node.
    Features = 2,
    /// Range subsample for one feature at a node.
    Range = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies a node across the whole training history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeKey {
    pub epoch: u32,
    pub tree: u32,
    /// Heap index: the root is 1, children of `i` are `2i` and `2i + 1`.
    pub node: u64,
}

impl NodeKey {
    pub fn root(epoch: u32, tree: u32) -> Self {
        Self { epoch, tree, node: 1 }
    }

    pub fn left(self) -> Self {
        Self { node: self.node.wrapping_mul(2), ..self }
    }

    pub fn right(self) -> Self {
        Self { node: self.node.wrapping_mul(2).wrapping_add(1), ..self }
    }

    pub fn at_epoch(self, epoch: u32) -> Self {
        Self { epoch, ..self }
    }
}

pub fn derive(master: u64, purpose: Purpose, parts: &[u64]) -> u64 {
    let mut h = splitmix(master ^ splitmix(purpose as u64));
    for &p in parts {
        h = splitmix(h ^ p);
    }
    h
}

pub fn stream(master: u64, purpose: Purpose, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, purpose, parts))
}

pub fn tree_rows(master: u64, epoch: u32, tree: u32) -> ChaCha8Rng {
    stream(master, Purpose::Rows, &[epoch as u64, tree as u64])
}

pub fn node_features(master: u64, key: NodeKey) -> ChaCha8Rng {
    stream(master, Purpose::Features, &[key.epoch as u64, key.tree as u64, key.node])
}

pub fn feature_range(master: u64, key: NodeKey, feature: usize) -> ChaCha8Rng {
    stream(master, Purpose::Range, &[key.epoch as u64, key.tree as u64, key.node, feature as u64])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let key = NodeKey::root(0, 3);
        let a: u64 = node_features(7, key).gen();
        assert_eq!(a, node_features(7, key).gen::<u64>());
        assert_ne!(a, node_features(7, key.left()).gen::<u64>());
        assert_ne!(a, node_features(7, key.at_epoch(1)).gen::<u64>());
        assert_ne!(a, node_features(8, key).gen::<u64>());
        assert_ne!(feature_range(7, key, 0).gen::<u64>(), feature_range(7, key, 1).gen::<u64>());
    }

    #[test]
    fn heap_indices() {
        let root = NodeKey::root(0, 0);
        assert_eq!(root.left().node, 2);
        assert_eq!(root.right().node, 3);
        assert_eq!(root.right().left().node, 6);
    }
}
