#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use revfrf_crypto::{KeyGenCenter, KeyGenConfig};
use revfrf_federation::{Federation, FederationSetup, ParticipantData, FIRST_PARTICIPANT};
use revfrf_forest::{FeatureSubset, Hyperparams, Task, TrainingData};
use revfrf_transport::{DeliveryOrder, PartyId};

pub fn keys() -> KeyGenCenter {
    static KEYS: OnceLock<KeyGenCenter> = OnceLock::new();
    KEYS.get_or_init(|| {
        let cfg = KeyGenConfig { scale_digits: 2, ..KeyGenConfig::with_prime_bits(64) };
        KeyGenCenter::generate(cfg, 7).unwrap()
    })
    .clone()
}

/// Quantized columns in `0..1000`; the label depends on features 0 and 1.
pub struct Dataset {
    pub columns: Vec<Vec<i64>>,
    pub labels: Vec<f64>,
    pub test_rows: Vec<Vec<i64>>,
    pub owners: Vec<PartyId>,
    pub task: Task,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(rows: usize, features: usize, participants: usize, task: Task, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<Vec<i64>> {
            (0..n).map(|_| (0..features).map(|_| rng.gen_range(0..1000)).collect()).collect()
        };
        let train = draw(rows);
        let test_rows = draw(rows / 4 + 1);
        let labels = train
            .iter()
            .map(|r| match task {
                Task::Classification => ((r[0] > 500) as u8 + (r[1] > 700) as u8) as f64,
                Task::Regression => r[0] as f64 / 100.0 - r[1] as f64 / 250.0,
            })
            .collect();
        let columns = (0..features).map(|f| train.iter().map(|r| r[f]).collect()).collect();
        let owners = (0..features).map(|f| FIRST_PARTICIPANT + (f % participants) as PartyId).collect();
        let num_classes = if task == Task::Classification { 3 } else { 0 };
        Self { columns, labels, test_rows, owners, task, num_classes }
    }

    pub fn training(&self) -> TrainingData<'_> {
        TrainingData {
            columns: &self.columns,
            labels: &self.labels,
            owners: &self.owners,
            task: self.task,
            num_classes: self.num_classes,
        }
    }

    pub fn participants(&self) -> Vec<ParticipantData> {
        let mut by_id: BTreeMap<PartyId, ParticipantData> = BTreeMap::new();
        for (f, &owner) in self.owners.iter().enumerate() {
            let p = by_id.entry(owner).or_insert_with(|| ParticipantData { id: owner, ..Default::default() });
            p.train.insert(f, self.columns[f].clone());
            p.test.insert(f, self.test_rows.iter().map(|r| r[f]).collect());
        }
        by_id.into_values().collect()
    }

    pub fn federation(&self, params: Hyperparams, seed: u64) -> Federation {
        Federation::setup(FederationSetup {
            keys: keys(),
            params,
            task: self.task,
            num_classes: self.num_classes,
            labels: self.labels.clone(),
            participants: self.participants(),
            seed,
            delivery: DeliveryOrder::Interleaved { seed },
        })
        .unwrap()
    }
}

pub fn small_params(trees: usize, depth: u32) -> Hyperparams {
    Hyperparams {
        max_trees: trees,
        max_depth: depth,
        split_count: 4,
        range_sample: 16,
        feature_subset: FeatureSubset::Sqrt,
        row_fraction: None,
        scale_digits: 2,
    }
}
