//! Versioned binary forest files.
//!
//! Layout: `"RVFF"`, format version, task, hyperparameters, class and
//! feature counts, then each tree as a pre-order sequence of node records.
//! Split payloads are written by their [`SplitCodec`].

use std::path::Path;

use revfrf_crypto::wire::{put_bytes, put_f64, put_u16, put_u32, put_u8, Reader};

use crate::params::{FeatureSubset, Hyperparams, Task};
use crate::select::{pack_bits, pack_trits, unpack_bits, unpack_trits};
use crate::tree::{Forest, Node, NodeKind, Split};
use crate::{ForestError, Result};

const MAGIC: &[u8; 4] = b"RVFF";
const VERSION: u16 = 1;
const LEAF: u8 = 0;
const INTERNAL: u8 = 1;

pub trait SplitCodec: Sized {
    fn encode_split(&self, out: &mut Vec<u8>);
    fn decode_split(r: &mut Reader<'_>) -> Result<Self>;
}

impl SplitCodec for i64 {
    fn encode_split(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_be_bytes());
    }

    fn decode_split(r: &mut Reader<'_>) -> Result<Self> {
        Ok(i64::from_be_bytes(r.take(8)?.try_into().expect("length checked")))
    }
}

impl SplitCodec for () {
    fn encode_split(&self, _: &mut Vec<u8>) {}

    fn decode_split(_: &mut Reader<'_>) -> Result<Self> {
        Ok(())
    }
}

fn encode_params(p: &Hyperparams, out: &mut Vec<u8>) {
    put_u32(out, p.max_trees as u32);
    put_u32(out, p.max_depth);
    put_u32(out, p.split_count as u32);
    put_u32(out, p.range_sample as u32);
    let (tag, k) = p.feature_subset.code();
    put_u8(out, tag);
    put_u32(out, k);
    match p.row_fraction {
        Some(f) => {
            put_u8(out, 1);
            put_f64(out, f);
        }
        None => put_u8(out, 0),
    }
    put_u32(out, p.scale_digits);
}

fn decode_params(r: &mut Reader<'_>) -> Result<Hyperparams> {
    let max_trees = r.u32()? as usize;
    let max_depth = r.u32()?;
    let split_count = r.u32()? as usize;
    let range_sample = r.u32()? as usize;
    let tag = r.u8()?;
    let feature_subset = FeatureSubset::from_code(tag, r.u32()?)?;
    let row_fraction = match r.u8()? {
        0 => None,
        _ => Some(r.f64()?),
    };
    let scale_digits = r.u32()?;
    Ok(Hyperparams { max_trees, max_depth, split_count, range_sample, feature_subset, row_fraction, scale_digits })
}

fn encode_node<S: SplitCodec>(node: &Node<S>, out: &mut Vec<u8>) {
    put_u8(out, if node.is_leaf() { LEAF } else { INTERNAL });
    put_u32(out, node.depth);
    put_u32(out, node.epoch);
    put_f64(out, node.weight);
    put_u32(out, node.mu.len() as u32);
    out.extend_from_slice(&pack_bits(&node.mu));
    put_u32(out, node.features.len() as u32);
    for &f in &node.features {
        put_u32(out, f as u32);
    }
    if let NodeKind::Internal { split, left, right } = &node.kind {
        put_u16(out, split.provider);
        put_u32(out, split.feature as u32);
        put_bytes(out, &pack_trits(&split.w0));
        put_u32(out, split.w0.len() as u32);
        split.payload.encode_split(out);
        encode_node(left, out);
        encode_node(right, out);
    }
}

fn decode_node<S: SplitCodec>(r: &mut Reader<'_>, budget: u32) -> Result<Node<S>> {
    if budget == 0 {
        return Err(ForestError::Decode("tree deeper than any valid forest".into()));
    }
    let kind = r.u8()?;
    let depth = r.u32()?;
    let epoch = r.u32()?;
    let weight = r.f64()?;
    let mu_len = r.u32()? as usize;
    let mu = unpack_bits(r.take(mu_len.div_ceil(8))?, mu_len)?;
    let nf = r.u32()? as usize;
    let features = (0..nf).map(|_| r.u32().map(|f| f as usize)).collect::<std::result::Result<Vec<_>, _>>()?;
    let kind = match kind {
        LEAF => NodeKind::Leaf,
        INTERNAL => {
            let provider = r.u16()?;
            let feature = r.u32()? as usize;
            let packed = r.bytes()?;
            let w_len = r.u32()? as usize;
            let w0 = unpack_trits(packed, w_len)?;
            let payload = S::decode_split(r)?;
            let left = Box::new(decode_node(r, budget - 1)?);
            let right = Box::new(decode_node(r, budget - 1)?);
            NodeKind::Internal { split: Split { payload, provider, feature, w0 }, left, right }
        }
        k => return Err(ForestError::Decode(format!("unknown node kind {k}"))),
    };
    Ok(Node { depth, mu, features, weight, epoch, kind })
}

impl<S: SplitCodec> Forest<S> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u16(&mut out, VERSION);
        put_u8(&mut out, self.task.code());
        encode_params(&self.params, &mut out);
        put_u32(&mut out, self.num_classes as u32);
        put_u32(&mut out, self.num_features as u32);
        put_u32(&mut out, self.trees.len() as u32);
        for t in &self.trees {
            encode_node(t, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(ForestError::Decode("not a forest file".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(ForestError::Decode(format!("unsupported format version {version}")));
        }
        let task = Task::from_code(r.u8()?)?;
        let params = decode_params(&mut r)?;
        let num_classes = r.u32()? as usize;
        let num_features = r.u32()? as usize;
        let n = r.u32()? as usize;
        let budget = params.max_depth.saturating_add(2).min(64);
        let trees = (0..n).map(|_| decode_node(&mut r, budget)).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(Forest { task, params, num_classes, num_features, trees })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Forest<i64> {
        let leaf = |w, mu: Vec<bool>| Box::new(Node::leaf(2, mu, vec![1], w, 1));
        let root = Node {
            depth: 1,
            mu: vec![true, true, false],
            features: vec![0, 1],
            weight: 0.5,
            epoch: 0,
            kind: NodeKind::Internal {
                split: Split { payload: -42, provider: 4, feature: 0, w0: vec![1, -1, 0] },
                left: leaf(1.0, vec![true, false, false]),
                right: leaf(0.0, vec![false, true, false]),
            },
        };
        Forest {
            task: Task::Classification,
            params: Hyperparams { row_fraction: Some(0.5), ..Default::default() },
            num_classes: 2,
            num_features: 2,
            trees: vec![root.clone(), Node::leaf(1, vec![true; 3], vec![0, 1], 1.0, 0)],
        }
    }

    #[test]
    fn roundtrip_bytes_and_file() {
        let f = sample();
        assert_eq!(Forest::<i64>::from_bytes(&f.to_bytes()).unwrap(), f);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.rvf");
        f.save(&path).unwrap();
        assert_eq!(Forest::<i64>::load(&path).unwrap(), f);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes();
        assert!(Forest::<i64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Forest::<i64>::from_bytes(&bad).is_err());
        let mut longer = bytes;
        longer.push(0);
        assert!(Forest::<i64>::from_bytes(&longer).is_err());
    }
}
