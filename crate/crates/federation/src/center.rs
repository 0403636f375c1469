//! The center server, which drives every protocol, plus the simulated
//! federation around it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use revfrf_crypto::{
    ho_add_finish, ho_add_start, ho_enc_ref, ho_re_enc, lt_blind, lt_finish, lt_operands, par_h_dec2, Ciphertext,
    CsShare, KeyDomain, KeyGenCenter, PublicKey, PublicParams, SecretKey,
};
use revfrf_forest::reference::{feature_subset, root_selection};
use revfrf_forest::seed::{self, NodeKey};
use revfrf_forest::{
    aggregate, best_candidate, child_masks, leaf_weight, weight_of, Forest, Hyperparams, LabelView, Node, NodeKind,
    Split, Task,
};
use revfrf_transport::{CostLedger, DeliveryOrder, PartyId, Primitive, SimBus, Stage, Transport};

use crate::keycenter::KeyCenter;
use crate::message::Message;
use crate::participant::{Participant, ParticipantData};
use crate::provider::ComputationProvider;
use crate::roles::{CENTER, COMPUTATION, FIRST_PARTICIPANT, KEY_GENERATION};
use crate::split::{EncryptedForest, EncryptedSplit};
use crate::token::{revocation_message, split_message, KeyedHashVerifier, TokenVerifier};
use crate::{FederationError, Result};

/// Everything needed to stand up a federation.
#[derive(Debug, Clone)]
pub struct FederationSetup {
    pub keys: KeyGenCenter,
    pub params: Hyperparams,
    pub task: Task,
    pub num_classes: usize,
    /// Training labels, held by the center server only.
    pub labels: Vec<f64>,
    pub participants: Vec<ParticipantData>,
    pub seed: u64,
    pub delivery: DeliveryOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevocationLevel {
    /// Destroy and rebuild the revoked participant's subtrees.
    Forward,
    /// Additionally refresh every destroyed split at the computation
    /// provider and again at the center server.
    Backward,
}

impl RevocationLevel {
    pub fn from_number(level: u8) -> Option<Self> {
        match level {
            1 => Some(RevocationLevel::Forward),
            2 => Some(RevocationLevel::Backward),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationReport {
    pub party: PartyId,
    pub level: RevocationLevel,
    pub destroyed_nodes: usize,
    pub destroyed_splits: usize,
    pub rebuilt_nodes: usize,
    pub trees: BTreeSet<usize>,
    /// Splits that went through the double refresh.
    pub refreshed: usize,
}

/// A destroyed split the center server still holds after revocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchivedSplit {
    pub provider: PartyId,
    pub tree: usize,
    pub ciphertext: Ciphertext,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub tree_outputs: Vec<f64>,
    /// Internal nodes evaluated across all trees.
    pub visited: usize,
}

pub struct Federation {
    bus: SimBus<Message, FederationError>,
    pp: PublicParams,
    sk: SecretKey,
    share: CsShare,
    directory: BTreeMap<PartyId, PublicKey>,
    verifier: KeyedHashVerifier,
    labels: Vec<f64>,
    task: Task,
    num_classes: usize,
    /// Owner of each feature; public knowledge.
    owners: Vec<PartyId>,
    params: Hyperparams,
    seed: u64,
    every_participant: Vec<PartyId>,
    active: BTreeSet<PartyId>,
    excluded: BTreeSet<PartyId>,
    used_nonces: BTreeSet<(PartyId, u64)>,
    forest: Option<EncryptedForest>,
    epoch: u32,
    archive: Vec<ArchivedSplit>,
    rng: ChaCha20Rng,
    observed_bits: u64,
    test_rows: usize,
}

fn unexpected(from: PartyId, expected: &'static str, got: &Message) -> FederationError {
    match got {
        Message::Refused { .. } => FederationError::Refused(from),
        other => FederationError::UnexpectedMessage { from, expected, got: other.name() },
    }
}

impl Federation {
    pub fn setup(setup: FederationSetup) -> Result<Self> {
        let FederationSetup { keys, params, task, num_classes, labels, mut participants, seed, delivery } = setup;
        participants.sort_by_key(|p| p.id);
        params.validate()?;
        if labels.is_empty() {
            return Err(FederationError::Config("no training labels".into()));
        }
        if participants.len() < 2 {
            return Err(FederationError::Config(format!("{} participants; at least 2 are required", participants.len())));
        }
        let num_features = participants.iter().map(|p| p.train.len()).sum::<usize>();
        let mut owners = vec![None; num_features];
        let mut ids = BTreeSet::new();
        let test_rows = participants[0].test.values().next().map_or(0, Vec::len);
        for p in &participants {
            if p.id < FIRST_PARTICIPANT || !ids.insert(p.id) {
                return Err(FederationError::Config(format!("participant id {} is reserved or repeated", p.id)));
            }
            if p.train.is_empty() {
                return Err(FederationError::Config(format!("participant {} owns no feature", p.id)));
            }
            for (&f, column) in &p.train {
                let slot = owners.get_mut(f).ok_or_else(|| {
                    FederationError::Config(format!("feature {f} outside 0..{num_features}; features must be numbered densely"))
                })?;
                if slot.replace(p.id).is_some() {
                    return Err(FederationError::Config(format!("feature {f} has two owners")));
                }
                if column.len() != labels.len() {
                    return Err(FederationError::Config(format!(
                        "feature {f} has {} training rows, labels have {}",
                        column.len(),
                        labels.len()
                    )));
                }
                let test = p.test.get(&f).map_or(0, Vec::len);
                if test != test_rows {
                    return Err(FederationError::Config(format!("feature {f} has {test} test rows, expected {test_rows}")));
                }
            }
            if p.test.keys().any(|f| !p.train.contains_key(f)) {
                return Err(FederationError::Config(format!("participant {} has test columns it does not train on", p.id)));
            }
        }
        let owners: Vec<PartyId> = owners.into_iter().map(|o| o.expect("every slot filled")).collect();

        let pp = keys.params().clone();
        let shares = keys.strong_shares();
        let sk = keys.weak_key(CENTER);
        let mut directory = BTreeMap::new();
        directory.insert(CENTER, sk.public_key(&pp));
        directory.insert(COMPUTATION, keys.weak_key(COMPUTATION).public_key(&pp));
        for &id in &ids {
            directory.insert(id, keys.weak_key(id).public_key(&pp));
        }
        let every_participant: Vec<PartyId> = ids.iter().copied().collect();
        let (verifier, signers) = KeyedHashVerifier::issue(seed, &every_participant);

        let mut bus = SimBus::new(delivery);
        bus.register_mailbox(CENTER)?;
        let cc_seed = seed::derive(seed, seed::Purpose::Rows, &[u64::MAX, COMPUTATION as u64]);
        bus.register_handler(COMPUTATION, ComputationProvider::new(pp.clone(), shares.lambda2, directory.clone(), cc_seed))?;
        for (data, signer) in participants.into_iter().zip(signers) {
            let id = data.id;
            let participant = Participant::new(data, pp.clone(), keys.weak_key(id), signer, params, seed);
            bus.register_handler(id, participant)?;
        }
        bus.register_handler(KEY_GENERATION, KeyCenter::new(keys))?;

        Ok(Self {
            bus,
            pp,
            sk,
            share: shares.lambda1,
            directory,
            verifier,
            labels,
            task,
            num_classes,
            owners,
            params,
            seed,
            active: ids,
            every_participant,
            excluded: BTreeSet::new(),
            used_nonces: BTreeSet::new(),
            forest: None,
            epoch: 0,
            archive: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(seed::derive(seed, seed::Purpose::Rows, &[u64::MAX, CENTER as u64])),
            observed_bits: 0,
            test_rows,
        })
    }

    pub fn public_params(&self) -> &PublicParams {
        &self.pp
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn forest(&self) -> Option<&EncryptedForest> {
        self.forest.as_ref()
    }

    /// Replaces the forest, e.g. with one loaded from disk.
    pub fn install_forest(&mut self, forest: EncryptedForest) -> Result<()> {
        if forest.num_features != self.owners.len() {
            return Err(FederationError::Config(format!(
                "forest expects {} features, the federation has {}",
                forest.num_features,
                self.owners.len()
            )));
        }
        self.epoch = self.epoch.max(forest.trees.iter().map(max_epoch).max().unwrap_or(0));
        self.forest = Some(forest);
        Ok(())
    }

    pub fn ledger(&self) -> &CostLedger {
        self.bus.ledger()
    }

    /// Routing bits the center server has learned from comparisons.
    pub fn observed_bits(&self) -> u64 {
        self.observed_bits
    }

    pub fn archive(&self) -> &[ArchivedSplit] {
        &self.archive
    }

    pub fn owners(&self) -> &[PartyId] {
        &self.owners
    }

    pub fn active_participants(&self) -> &BTreeSet<PartyId> {
        &self.active
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn test_rows(&self) -> usize {
        self.test_rows
    }

    pub fn participant(&self, id: PartyId) -> Option<&Participant> {
        self.bus.party::<Participant>(id)
    }

    pub fn key_center(&self) -> &KeyCenter {
        self.bus.party::<KeyCenter>(KEY_GENERATION).expect("registered at setup")
    }

    pub fn computation_provider(&self) -> &ComputationProvider {
        self.bus.party::<ComputationProvider>(COMPUTATION).expect("registered at setup")
    }

    fn exchange(&mut self, requests: Vec<(PartyId, Message)>) -> Result<Vec<(PartyId, Message)>> {
        for (to, msg) in requests {
            self.bus.send(CENTER, to, msg)?;
        }
        self.bus.run_until_quiet()?;
        Ok(self.bus.take(CENTER))
    }

    fn ask(&mut self, to: PartyId, msg: Message, expected: &'static str) -> Result<Message> {
        let mut replies = self.exchange(vec![(to, msg)])?;
        if replies.len() > 1 {
            return Err(FederationError::Protocol(format!("{} replies to one {expected} request", replies.len())));
        }
        match replies.pop() {
            None => Err(FederationError::MissingReply { from: to, expected }),
            Some((from, _)) if from != to => Err(FederationError::Protocol(format!("party {from} answered for {to}"))),
            Some((_, Message::Refused { .. })) => Err(FederationError::Refused(to)),
            Some((_, msg)) => Ok(msg),
        }
    }

    fn key_of(&self, party: PartyId) -> Result<&PublicKey> {
        self.directory.get(&party).ok_or(FederationError::NotParticipant(party))
    }

    /// Secure comparison with the computation provider: `[[l]]` under
    /// `pk_CS + pk_partner`, `l = 1` iff the first plaintext is smaller.
    fn compare(&mut self, first: (&Ciphertext, &PublicKey), second: (&Ciphertext, &PublicKey), partner: PartyId) -> Result<Ciphertext> {
        let target = PublicKey::combine(&self.pp, self.key_of(CENTER)?, self.key_of(partner)?)?;
        let coin = self.rng.gen::<bool>();
        let ops = lt_operands(&self.pp, first, second, coin, &mut self.rng)?;
        let (request, pending) =
            ho_add_start(&self.pp, &self.share, (&ops.first.0, &ops.first.1), (&ops.second.0, &ops.second.1), &mut self.rng)?;
        let sum = match self.ask(COMPUTATION, Message::AddRequest(request), "AddReply")? {
            Message::AddReply(ct) => ct,
            other => return Err(unexpected(COMPUTATION, "AddReply", &other)),
        };
        let beta = ho_add_finish(&self.pp, pending, &sum, &mut self.rng)?;
        let request = lt_blind(&self.pp, &self.share, &beta, target.domain(), &mut self.rng)?;
        let bit = match self.ask(COMPUTATION, Message::Compare(request), "CompareReply")? {
            Message::CompareReply(ct) => ct,
            other => return Err(unexpected(COMPUTATION, "CompareReply", &other)),
        };
        let bit = lt_finish(&self.pp, coin, bit, &target, &mut self.rng)?;
        self.bus.record_op(CENTER, Primitive::HoLT, 1);
        Ok(bit)
    }

    /// Has the provider strip its key from the comparison bit, then opens
    /// it. `true` routes left.
    fn open_bit(&mut self, bit: Ciphertext, provider: PartyId, requester: PartyId) -> Result<bool> {
        let partial = match self.ask(provider, Message::RouteBit { requester, bit }, "RouteBitPartial")? {
            Message::RouteBitPartial(ct) => ct,
            other => return Err(unexpected(provider, "RouteBitPartial", &other)),
        };
        let l = par_h_dec2(&self.pp, &self.sk, &partial)?;
        self.bus.record_op(CENTER, Primitive::ParHDec2, 1);
        self.observed_bits += 1;
        match u8::try_from(&l) {
            Ok(0) => Ok(false),
            Ok(1) => Ok(true),
            _ => Err(FederationError::Protocol(format!("comparison bit opened to {l}"))),
        }
    }

    fn global_weight(&self) -> f64 {
        leaf_weight(&self.labels, self.task).unwrap_or(0.0)
    }

    /// Trains a fresh forest over every active participant.
    pub fn train(&mut self) -> Result<&EncryptedForest> {
        self.bus.set_stage(Stage::Construction);
        let features: Vec<usize> =
            (0..self.owners.len()).filter(|&f| !self.excluded.contains(&self.owners[f])).collect();
        let fallback = self.global_weight();
        let mut trees = Vec::with_capacity(self.params.max_trees);
        for t in 0..self.params.max_trees as u32 {
            let mu = root_selection(self.labels.len(), &self.params, self.seed, t);
            trees.push(self.expand(mu, features.clone(), 1, NodeKey::root(0, t), fallback)?);
        }
        self.forest = Some(Forest {
            task: self.task,
            params: self.params,
            num_classes: self.num_classes,
            num_features: self.owners.len(),
            trees,
        });
        Ok(self.forest.as_ref().expect("just set"))
    }

    /// Federated leaf expansion: grows the subtree at `key`.
    fn expand(&mut self, mu: Vec<bool>, features: Vec<usize>, depth: u32, key: NodeKey, fallback: f64) -> Result<Node<EncryptedSplit>> {
        let weight = weight_of(&self.labels, &mu, self.task, fallback);
        if depth > self.params.max_depth || features.is_empty() || !mu.iter().any(|&m| m) {
            return Ok(Node::leaf(depth, mu, features, weight, key.epoch));
        }
        let Some((provider, feature, split, w0)) = self.find_split(&mu, &features, key)? else {
            return Ok(Node::leaf(depth, mu, features, weight, key.epoch));
        };
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
                split: Split { payload: split, provider, feature, w0 },
                left: Box::new(left),
                right: Box::new(right),
            },
        })
    }

    /// Collects split vectors from the owners of the sampled features,
    /// scores them, and fetches the winner's encrypted threshold. `None`
    /// when no candidate splits anything.
    fn find_split(
        &mut self,
        mu: &[bool],
        features: &[usize],
        key: NodeKey,
    ) -> Result<Option<(PartyId, usize, EncryptedSplit, Vec<i8>)>> {
        let chosen = feature_subset(features, &self.owners, &self.params, self.seed, key);
        let mut examined = vec![false; self.owners.len()];
        for &f in &chosen {
            examined[f] = true;
        }
        let providers: BTreeSet<PartyId> = chosen.iter().map(|&f| self.owners[f]).collect();
        let requests = providers
            .iter()
            .map(|&p| (p, Message::Recommend { key, mu: mu.to_vec(), features: examined.clone() }))
            .collect();
        let mut replies: BTreeMap<PartyId, Vec<(u32, Vec<Vec<i8>>)>> = BTreeMap::new();
        for (from, msg) in self.exchange(requests)? {
            match msg {
                Message::SplitVectors { key: k, sets } if k == key => {
                    replies.insert(from, sets);
                }
                other => return Err(unexpected(from, "SplitVectors", &other)),
            }
        }

        let view = LabelView { task: self.task, labels: &self.labels, num_classes: self.num_classes };
        let mut candidates = Vec::new();
        let mut scores = Vec::new();
        for &p in &providers {
            let sets = replies.remove(&p).ok_or(FederationError::MissingReply { from: p, expected: "SplitVectors" })?;
            let expected: Vec<usize> = chosen.iter().copied().filter(|&f| self.owners[f] == p).collect();
            if sets.iter().map(|(f, _)| *f as usize).ne(expected.iter().copied()) {
                return Err(FederationError::Protocol(format!("party {p} answered for the wrong features")));
            }
            for (f, vectors) in sets {
                for (i, w) in vectors.into_iter().enumerate() {
                    if w.len() != mu.len() {
                        return Err(FederationError::Protocol(format!("party {p} sent a split vector of length {}", w.len())));
                    }
                    scores.push(view.score(&w));
                    candidates.push((p, f, i as u32, w));
                }
            }
        }
        let Some(best) = best_candidate(&scores) else { return Ok(None) };
        let (provider, feature, index, w0) = candidates.swap_remove(best);

        let request = Message::WinnerRequest { key, feature, index };
        let (split, token) = match self.ask(provider, request, "WinnerSplit")? {
            Message::WinnerSplit { key: k, split, token } if k == key => (split, token),
            other => return Err(unexpected(provider, "WinnerSplit", &other)),
        };
        if split.domain() != KeyDomain::Single(provider) {
            return Err(FederationError::Protocol(format!("winning split arrived under {}", split.domain())));
        }
        if !self.verifier.verify(provider, &split_message(provider, key.epoch, key.tree, key.node), &token) {
            return Err(FederationError::InvalidToken(provider));
        }
        Ok(Some((provider, feature as usize, EncryptedSplit { ciphertext: split, token }, w0)))
    }

    fn take_forest(&mut self) -> Result<EncryptedForest> {
        self.forest.take().ok_or(FederationError::NoForest)
    }

    /// Prediction for a row supplied by `requester`, who encrypts every
    /// feature under its own key and uploads the result.
    pub fn predict(&mut self, requester: PartyId, row: &[i64]) -> Result<Prediction> {
        self.bus.set_stage(Stage::Prediction);
        if !self.active.contains(&requester) {
            return Err(FederationError::NotParticipant(requester));
        }
        let upload = self
            .bus
            .party_mut::<Participant>(requester)
            .ok_or(FederationError::NotParticipant(requester))?
            .encrypt_request(row)?;
        self.bus.record_op(requester, Primitive::HoEnc, upload.len() as u64);
        self.bus.send(requester, CENTER, Message::PredictRequest { features: upload })?;
        self.bus.run_until_quiet()?;
        let mut inbox = self.bus.take(CENTER);
        let features = match inbox.pop() {
            Some((from, Message::PredictRequest { features })) if from == requester && inbox.is_empty() => features,
            Some((from, other)) => return Err(unexpected(from, "PredictRequest", &other)),
            None => return Err(FederationError::MissingReply { from: requester, expected: "PredictRequest" }),
        };
        if features.len() != self.owners.len() {
            return Err(FederationError::IncompleteRequest { expected: self.owners.len(), got: features.len() });
        }
        if let Some(ct) = features.iter().find(|ct| ct.domain() != KeyDomain::Single(requester)) {
            return Err(FederationError::Protocol(format!("request feature encrypted under {}", ct.domain())));
        }
        let requester_key = self.key_of(requester)?.clone();

        let forest = self.take_forest()?;
        let result = self.predict_with(&forest, |fed, split| {
            let provider_key = fed.key_of(split.provider)?.clone();
            let x = (&features[split.feature], &requester_key);
            let bit = fed.compare((&split.payload.ciphertext, &provider_key), x, split.provider)?;
            fed.open_bit(bit, split.provider, requester)
        });
        self.forest = Some(forest);
        let prediction = result?;
        self.bus.send(CENTER, requester, Message::PredictResult { value: prediction.value })?;
        self.bus.run_until_quiet()?;
        Ok(prediction)
    }

    /// Prediction for test row `row`, whose features stay with their owners.
    pub fn test(&mut self, row: usize) -> Result<Prediction> {
        self.bus.set_stage(Stage::Prediction);
        if row >= self.test_rows {
            return Err(FederationError::RowOutOfRange { row, rows: self.test_rows });
        }
        let forest = self.take_forest()?;
        let result = self.predict_with(&forest, |fed, split| {
            let provider = split.provider;
            let toward_provider = ho_re_enc(&fed.pp, &fed.sk, &split.payload.ciphertext)?;
            fed.bus.record_op(CENTER, Primitive::HReEnc, 1);
            let request = Message::TestSplit { row: row as u32, feature: split.feature as u32, split: toward_provider };
            let (s, x) = match fed.ask(provider, request, "TestOperands")? {
                Message::TestOperands { split, value } => (split, value),
                other => return Err(unexpected(provider, "TestOperands", &other)),
            };
            if s.domain() != KeyDomain::Single(CENTER) || x.domain() != KeyDomain::Single(provider) {
                return Err(FederationError::Protocol("test operands under unexpected keys".into()));
            }
            let center_key = fed.key_of(CENTER)?.clone();
            let provider_key = fed.key_of(provider)?.clone();
            let bit = fed.compare((&s, &center_key), (&x, &provider_key), provider)?;
            fed.open_bit(bit, provider, CENTER)
        });
        self.forest = Some(forest);
        result
    }

    fn predict_with(
        &mut self,
        forest: &EncryptedForest,
        mut go_left: impl FnMut(&mut Self, &Split<EncryptedSplit>) -> Result<bool>,
    ) -> Result<Prediction> {
        let mut tree_outputs = Vec::with_capacity(forest.trees.len());
        let mut visited = 0;
        for tree in &forest.trees {
            let (w, v) = tree.walk(&mut |split| go_left(self, split))?;
            tree_outputs.push(w);
            visited += v;
        }
        let value = aggregate(forest.task, &tree_outputs)?;
        Ok(Prediction { value, tree_outputs, visited })
    }

    /// A signed revocation request, produced by the participant itself.
    pub fn revocation_request(&self, party: PartyId, nonce: u64) -> Result<Message> {
        Ok(self.participant(party).ok_or(FederationError::NotParticipant(party))?.revocation_request(nonce))
    }

    /// Handles a revocation request `request` sent by `from`: verifies it,
    /// destroys and rebuilds every subtree rooted at one of `from`'s splits,
    /// optionally refreshes the destroyed splits, has the key generation
    /// center revoke `from`'s keys and announces the removal.
    pub fn revoke(&mut self, from: PartyId, request: Message, level: RevocationLevel) -> Result<RevocationReport> {
        self.bus.set_stage(Stage::Revocation);
        self.bus.send(from, CENTER, request)?;
        self.bus.run_until_quiet()?;
        let mut inbox = self.bus.take(CENTER);
        let (nonce, token) = match inbox.pop() {
            Some((f, Message::Revoke { nonce, token })) if f == from && inbox.is_empty() => (nonce, token),
            Some((f, other)) => return Err(unexpected(f, "Revoke", &other)),
            None => return Err(FederationError::MissingReply { from, expected: "Revoke" }),
        };
        let genuine = self.verifier.verify(from, &revocation_message(from, nonce), &token);
        if !self.active.contains(&from) || !genuine || !self.used_nonces.insert((from, nonce)) {
            return Err(FederationError::InvalidToken(from));
        }

        self.epoch += 1;
        self.excluded.insert(from);
        self.active.remove(&from);
        let mut report = RevocationReport {
            party: from,
            level,
            destroyed_nodes: 0,
            destroyed_splits: 0,
            rebuilt_nodes: 0,
            trees: BTreeSet::new(),
            refreshed: 0,
        };
        let mut destroyed = Vec::new();
        if let Some(mut forest) = self.forest.take() {
            let fallback = self.global_weight();
            let mut outcome = Ok(());
            for (t, tree) in forest.trees.iter_mut().enumerate() {
                let before = report.destroyed_nodes;
                let key = NodeKey::root(self.epoch, t as u32);
                outcome = self.rebuild(tree, from, key, fallback, &mut report, &mut destroyed);
                if outcome.is_err() {
                    break;
                }
                if report.destroyed_nodes > before {
                    report.trees.insert(t);
                }
            }
            self.forest = Some(forest);
            outcome?;
        }

        if level == RevocationLevel::Backward && !destroyed.is_empty() {
            let cts = destroyed.iter().map(|a: &ArchivedSplit| a.ciphertext.clone()).collect();
            let refreshed = match self.ask(COMPUTATION, Message::Refresh(cts), "Refreshed")? {
                Message::Refreshed(cts) if cts.len() == destroyed.len() => cts,
                other => return Err(unexpected(COMPUTATION, "Refreshed", &other)),
            };
            let one = BigUint::from(1u32);
            for (archived, ct) in destroyed.iter_mut().zip(refreshed) {
                let r = self.rng.gen_biguint_range(&one, self.pp.n());
                archived.ciphertext = ho_enc_ref(&self.pp, &r, &ct)?;
            }
            self.bus.record_op(CENTER, Primitive::HEncRef, destroyed.len() as u64);
            report.refreshed = destroyed.len();
        }
        self.archive.extend(destroyed);
        self.remove(from)?;
        Ok(report)
    }

    /// Has the key generation center revoke `party`'s keys and announces
    /// the removal to everyone.
    fn remove(&mut self, party: PartyId) -> Result<()> {
        match self.ask(KEY_GENERATION, Message::RevokeKeys { party }, "KeysRevoked")? {
            Message::KeysRevoked { party: p } if p == party => {}
            other => return Err(unexpected(KEY_GENERATION, "KeysRevoked", &other)),
        }
        self.directory.remove(&party);
        self.verifier.forget(party);
        let mut notices = vec![(COMPUTATION, Message::Removal { party })];
        notices.extend(self.every_participant.iter().map(|&p| (p, Message::Removal { party })));
        let stray = self.exchange(notices)?;
        if let Some((f, m)) = stray.first() {
            return Err(unexpected(*f, "nothing", m));
        }
        Ok(())
    }

    /// Re-applies revocations completed in an earlier session, in order,
    /// to a freshly set-up federation. The forest is left as installed.
    pub fn replay_revocations(&mut self, parties: &[PartyId]) -> Result<()> {
        self.bus.set_stage(Stage::Revocation);
        for &party in parties {
            if !self.active.remove(&party) {
                return Err(FederationError::NotParticipant(party));
            }
            self.excluded.insert(party);
            self.epoch += 1;
            self.remove(party)?;
        }
        Ok(())
    }

    pub fn revoked(&self) -> &BTreeSet<PartyId> {
        &self.excluded
    }

    fn rebuild(
        &mut self,
        node: &mut Node<EncryptedSplit>,
        revoked: PartyId,
        key: NodeKey,
        fallback: f64,
        report: &mut RevocationReport,
        destroyed: &mut Vec<ArchivedSplit>,
    ) -> Result<()> {
        let hit = node.split().is_some_and(|s| s.provider == revoked) && node.epoch < key.epoch;
        if hit {
            report.destroyed_nodes += node.node_count();
            report.destroyed_splits += node.internal_count();
            node.visit(&mut |n| {
                if let Some(s) = n.split() {
                    destroyed.push(ArchivedSplit {
                        provider: s.provider,
                        tree: key.tree as usize,
                        ciphertext: s.payload.ciphertext.clone(),
                    });
                }
            });
            let features: Vec<usize> =
                node.features.iter().copied().filter(|&f| !self.excluded.contains(&self.owners[f])).collect();
            let mu = std::mem::take(&mut node.mu);
            *node = self.expand(mu, features, node.depth, key, fallback)?;
            report.rebuilt_nodes += node.node_count();
            return Ok(());
        }
        let weight = node.weight;
        if let NodeKind::Internal { left, right, .. } = &mut node.kind {
            self.rebuild(left, revoked, key.left(), weight, report, destroyed)?;
            self.rebuild(right, revoked, key.right(), weight, report, destroyed)?;
        }
        Ok(())
    }

    /// Test hook: the forest with every split decrypted by its provider's
    /// key, regenerated by the key generation center.
    #[cfg(feature = "escrow")]
    pub fn escrow_forest(&self) -> Result<revfrf_forest::PlainForest> {
        let forest = self.forest.as_ref().ok_or(FederationError::NoForest)?;
        forest.map_payload(|s| self.escrow_open(&s.ciphertext))
    }

    /// Test hook: decrypts a single-key ciphertext holding a fixed-point
    /// value with its owner's key.
    #[cfg(feature = "escrow")]
    pub fn escrow_open(&self, ct: &Ciphertext) -> Result<i64> {
        let KeyDomain::Single(owner) = ct.domain() else {
            return Err(revfrf_crypto::CryptoError::DomainMisuse { op: "escrow decryption", domain: ct.domain() }.into());
        };
        let raw = revfrf_crypto::decrypt(&self.pp, &self.key_center().escrow_key(owner), ct)?;
        let ticks = revfrf_crypto::FixedPoint::from_raw(raw, &self.pp)?.ticks(&self.pp);
        i64::try_from(&ticks).map_err(|_| FederationError::Protocol(format!("threshold {ticks} exceeds 64 bits")))
    }
}

fn max_epoch(node: &Node<EncryptedSplit>) -> u32 {
    let mut m = node.epoch;
    node.visit(&mut |n| m = m.max(n.epoch));
    m
}
