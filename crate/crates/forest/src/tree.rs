use crate::params::{Hyperparams, Task};
use crate::select::selected;
use crate::{ForestError, Result};

/// Prediction value of a set of training labels: the mean for regression,
/// the majority class (smallest id on ties) for classification. `None` for
/// an empty set; callers fall back to the parent's weight.
pub fn leaf_weight(labels: &[f64], task: Task) -> Option<f64> {
    if labels.is_empty() {
        return None;
    }
    Some(match task {
        Task::Regression => labels.iter().sum::<f64>() / labels.len() as f64,
        Task::Classification => majority(labels.iter().map(|&y| y as usize)) as f64,
    })
}

fn majority(classes: impl Iterator<Item = usize>) -> usize {
    let mut counts: Vec<usize> = Vec::new();
    for c in classes {
        if c >= counts.len() {
            counts.resize(c + 1, 0);
        }
        counts[c] += 1;
    }
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Weight of the rows selected by `mu`, or `fallback` when none are.
pub fn weight_of(labels: &[f64], mu: &[bool], task: Task, fallback: f64) -> f64 {
    let ys: Vec<f64> = selected(mu).map(|i| labels[i]).collect();
    leaf_weight(&ys, task).unwrap_or(fallback)
}

/// Combines per-tree outputs: mean for regression, majority vote (smallest
/// class id on ties) for classification.
pub fn aggregate(task: Task, outputs: &[f64]) -> Result<f64> {
    if outputs.is_empty() {
        return Err(ForestError::EmptyForest);
    }
    Ok(match task {
        Task::Regression => outputs.iter().sum::<f64>() / outputs.len() as f64,
        Task::Classification => majority(outputs.iter().map(|&y| y.round().max(0.0) as usize)) as f64,
    })
}

/// The winning split of an internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<S> {
    /// The threshold itself: plaintext in the reference trainer, a
    /// ciphertext plus credentials in the federation.
    pub payload: S,
    pub provider: u16,
    pub feature: usize,
    pub w0: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind<S> {
    Leaf,
    Internal { split: Split<S>, left: Box<Node<S>>, right: Box<Node<S>> },
}

/// A tree node with everything needed to rebuild it later: the rows that
/// reached it, the features still available on entry, and its depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Node<S> {
    pub depth: u32,
    pub mu: Vec<bool>,
    /// Features available on entry (`F′`), sorted.
    pub features: Vec<usize>,
    /// Leaf value; internal nodes keep it as the fallback for empty children.
    pub weight: f64,
    /// Revocation epoch in which this node was built.
    pub epoch: u32,
    pub kind: NodeKind<S>,
}

impl<S> Node<S> {
    pub fn leaf(depth: u32, mu: Vec<bool>, features: Vec<usize>, weight: f64, epoch: u32) -> Self {
        Self { depth, mu, features, weight, epoch, kind: NodeKind::Leaf }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }

    pub fn split(&self) -> Option<&Split<S>> {
        match &self.kind {
            NodeKind::Internal { split, .. } => Some(split),
            NodeKind::Leaf => None,
        }
    }

    pub fn children(&self) -> Option<(&Node<S>, &Node<S>)> {
        match &self.kind {
            NodeKind::Internal { left, right, .. } => Some((left, right)),
            NodeKind::Leaf => None,
        }
    }

    /// `F′` minus the winning feature; what the children receive.
    pub fn remaining_features(&self) -> Vec<usize> {
        match self.split() {
            Some(s) => self.features.iter().copied().filter(|&f| f != s.feature).collect(),
            None => self.features.clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().map_or(0, |(l, r)| l.node_count() + r.node_count())
    }

    pub fn internal_count(&self) -> usize {
        self.children().map_or(0, |(l, r)| 1 + l.internal_count() + r.internal_count())
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> u32 {
        self.children().map_or(0, |(l, r)| 1 + l.height().max(r.height()))
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Node<S>)) {
        f(self);
        if let Some((l, r)) = self.children() {
            l.visit(f);
            r.visit(f);
        }
    }

    pub fn providers(&self) -> Vec<u16> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let Some(s) = n.split() {
                out.push(s.provider);
            }
        });
        out
    }

    pub fn map_payload<T, E>(&self, f: &mut impl FnMut(&S) -> std::result::Result<T, E>) -> std::result::Result<Node<T>, E> {
        let kind = match &self.kind {
            NodeKind::Leaf => NodeKind::Leaf,
            NodeKind::Internal { split, left, right } => NodeKind::Internal {
                split: Split {
                    payload: f(&split.payload)?,
                    provider: split.provider,
                    feature: split.feature,
                    w0: split.w0.clone(),
                },
                left: Box::new(left.map_payload(f)?),
                right: Box::new(right.map_payload(f)?),
            },
        };
        Ok(Node {
            depth: self.depth,
            mu: self.mu.clone(),
            features: self.features.clone(),
            weight: self.weight,
            epoch: self.epoch,
            kind,
        })
    }

    /// Turns every node deeper than `max_depth` into a leaf.
    pub fn prune(&mut self, max_depth: u32) {
        if self.depth > max_depth {
            self.kind = NodeKind::Leaf;
        } else if let NodeKind::Internal { left, right, .. } = &mut self.kind {
            left.prune(max_depth);
            right.prune(max_depth);
        }
    }

    /// Follows `go_left` from this node to a leaf. Returns the leaf weight and
    /// the number of internal nodes visited.
    pub fn walk<E>(&self, go_left: &mut impl FnMut(&Split<S>) -> std::result::Result<bool, E>) -> std::result::Result<(f64, usize), E> {
        let mut node = self;
        let mut visited = 0;
        while let NodeKind::Internal { split, left, right } = &node.kind {
            visited += 1;
            node = if go_left(split)? { left } else { right };
        }
        Ok((node.weight, visited))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<S> {
    pub task: Task,
    pub params: Hyperparams,
    pub num_classes: usize,
    pub num_features: usize,
    pub trees: Vec<Node<S>>,
}

impl<S> Forest<S> {
    /// The first `max_trees` trees, pruned to `max_depth`. Per-node seeding
    /// makes this exactly the forest trained with those limits.
    pub fn truncated(&self, max_trees: usize, max_depth: u32) -> Self
    where
        S: Clone,
    {
        let mut trees: Vec<Node<S>> = self.trees.iter().take(max_trees).cloned().collect();
        for t in &mut trees {
            t.prune(max_depth);
        }
        let params = Hyperparams { max_trees: trees.len(), max_depth: max_depth.min(self.params.max_depth), ..self.params };
        Self { task: self.task, params, num_classes: self.num_classes, num_features: self.num_features, trees }
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(Node::node_count).sum()
    }

    pub fn internal_count(&self) -> usize {
        self.trees.iter().map(Node::internal_count).sum()
    }

    pub fn providers(&self) -> Vec<u16> {
        self.trees.iter().flat_map(Node::providers).collect()
    }

    pub fn map_payload<T, E>(&self, mut f: impl FnMut(&S) -> std::result::Result<T, E>) -> std::result::Result<Forest<T>, E> {
        Ok(Forest {
            task: self.task,
            params: self.params,
            num_classes: self.num_classes,
            num_features: self.num_features,
            trees: self.trees.iter().map(|t| t.map_payload(&mut f)).collect::<std::result::Result<_, _>>()?,
        })
    }

    /// Everything except split payloads; for comparing forests whose
    /// payloads are not directly comparable.
    pub fn skeleton(&self) -> Forest<()> {
        self.map_payload(|_| Ok::<_, std::convert::Infallible>(())).expect("infallible")
    }
}

/// A forest whose thresholds are plaintext quantized values.
pub type PlainForest = Forest<i64>;

impl PlainForest {
    /// Per-tree outputs for a quantized row; a node routes left iff its
    /// threshold is strictly below the row's value.
    pub fn tree_outputs(&self, row: &[i64]) -> Result<Vec<(f64, usize)>> {
        if row.len() != self.num_features {
            return Err(ForestError::LengthMismatch { expected: self.num_features, got: row.len() });
        }
        self.trees
            .iter()
            .map(|t| t.walk(&mut |s: &Split<i64>| Ok::<_, ForestError>(s.payload < row[s.feature])))
            .collect()
    }

    pub fn predict(&self, row: &[i64]) -> Result<f64> {
        let outputs: Vec<f64> = self.tree_outputs(row)?.into_iter().map(|(w, _)| w).collect();
        aggregate(self.task, &outputs)
    }
}
