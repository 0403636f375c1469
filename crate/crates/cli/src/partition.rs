use std::collections::{BTreeMap, BTreeSet};

use revfrf_federation::{ParticipantData, FIRST_PARTICIPANT};
use revfrf_transport::PartyId;

use crate::{CliError, Result};

/// Which participant owns which feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    owners: BTreeMap<PartyId, Vec<usize>>,
}

impl PartitionPlan {
    /// Checks that `owners` covers `0..num_features` exactly once and that
    /// every participant owns something.
    pub fn new(owners: BTreeMap<PartyId, Vec<usize>>, num_features: usize) -> Result<Self> {
        if owners.len() < 2 {
            return Err(CliError::Validation(format!("{} participants; at least 2 are required", owners.len())));
        }
        let mut seen = BTreeSet::new();
        for (&p, features) in &owners {
            if p < FIRST_PARTICIPANT {
                return Err(CliError::Validation(format!("participant id {p} is reserved (ids start at {FIRST_PARTICIPANT})")));
            }
            if features.is_empty() {
                return Err(CliError::Validation(format!("participant {p} owns no feature")));
            }
            for &f in features {
                if f >= num_features {
                    return Err(CliError::Validation(format!("participant {p} owns feature {f}; there are {num_features}")));
                }
                if !seen.insert(f) {
                    return Err(CliError::Validation(format!("feature {f} is assigned twice")));
                }
            }
        }
        if seen.len() != num_features {
            let missing: Vec<usize> = (0..num_features).filter(|f| !seen.contains(f)).collect();
            return Err(CliError::Validation(format!("features {missing:?} have no owner")));
        }
        Ok(Self { owners })
    }

    /// Feature `f` goes to participant `FIRST_PARTICIPANT + f mod n`.
    pub fn round_robin(num_features: usize, participants: usize) -> Result<Self> {
        Self::check_count(num_features, participants)?;
        let mut owners = BTreeMap::new();
        for f in 0..num_features {
            owners.entry(FIRST_PARTICIPANT + (f % participants) as PartyId).or_insert_with(Vec::new).push(f);
        }
        Self::new(owners, num_features)
    }

    /// Consecutive blocks of features, as even as possible.
    pub fn contiguous(num_features: usize, participants: usize) -> Result<Self> {
        Self::check_count(num_features, participants)?;
        let mut owners = BTreeMap::new();
        for f in 0..num_features {
            owners.entry(FIRST_PARTICIPANT + (f * participants / num_features) as PartyId).or_insert_with(Vec::new).push(f);
        }
        Self::new(owners, num_features)
    }

    fn check_count(num_features: usize, participants: usize) -> Result<()> {
        if participants > num_features {
            return Err(CliError::Validation(format!("{participants} participants for {num_features} features")));
        }
        if participants > (PartyId::MAX - FIRST_PARTICIPANT) as usize {
            return Err(CliError::Validation(format!("{participants} participants exceed the id space")));
        }
        Ok(())
    }

    pub fn participants(&self) -> impl Iterator<Item = PartyId> + '_ {
        self.owners.keys().copied()
    }

    pub fn features_of(&self, party: PartyId) -> Option<&[usize]> {
        self.owners.get(&party).map(Vec::as_slice)
    }

    /// `owners()[f]` is the participant holding feature `f`.
    pub fn owners(&self) -> Vec<PartyId> {
        let n = self.owners.values().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (&p, features) in &self.owners {
            for &f in features {
                out[f] = p;
            }
        }
        out
    }

    /// Vertical slices of quantized column-major data.
    pub fn slice(&self, train: &[Vec<i64>], test: &[Vec<i64>]) -> Vec<ParticipantData> {
        self.owners
            .iter()
            .map(|(&id, features)| ParticipantData {
                id,
                train: features.iter().map(|&f| (f, train[f].clone())).collect(),
                test: features.iter().map(|&f| (f, test[f].clone())).collect(),
            })
            .collect()
    }
}
