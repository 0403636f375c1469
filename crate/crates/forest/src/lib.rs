//! Random-decision-tree building blocks shared by the center server and a
//! centralized reference trainer.
//!
//! Feature values are quantized to integers (see [`FixedGrid`]) before any
//! comparison, so a forest trained here and one trained over encrypted
//! thresholds route every row identically. A row goes to the left child when
//! the node's threshold is strictly below its value.

mod codec;
mod error;
mod params;
pub mod reference;
mod score;
pub mod seed;
mod select;
mod splits;
mod tree;

pub use codec::SplitCodec;
pub use error::{ForestError, IoError, Result};
pub use params::{FeatureSubset, FixedGrid, Hyperparams, Task};
pub use reference::{train_reference_forest, RebuildReport, TrainingData};
pub use score::{best_candidate, gini_score, mse_score, CandidateScore, LabelView};
pub use select::{child_masks, pack_bits, pack_trits, partition, selected, sign, unpack_bits, unpack_trits};
pub use splits::{even_thresholds, recommend_splits, split_vector, CandidateSplitSet};
pub use tree::{aggregate, leaf_weight, weight_of, Forest, Node, NodeKind, PlainForest, Split};
