//! Reliability of hybrid decision trees.
//!
//! A hybrid tree mixes deterministic rule nodes, which never err, with ML
//! nodes that err independently with probability `p_v`. A decision is
//! correct only if every node on its root-to-leaf path decides correctly.

use crate::control::{bootstrap_interval_with, ControlInterval};
use crate::rng::{derive_seed, stream_rng};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Deterministic,
    Nondeterministic,
}

/// Nested form used by tree files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub kind: NodeKind,
    #[serde(default)]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeSpec>,
}

impl TreeSpec {
    pub fn leaf(kind: NodeKind, p: f64) -> Self {
        TreeSpec { kind, p, children: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub error_prob: f64,
    pub children: Vec<usize>,
}

/// Arena tree with nodes in preorder; the root is node 0 and every child
/// has a larger id than its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeSpec", into = "TreeSpec")]
pub struct HybridTree {
    nodes: Vec<Node>,
}

impl TryFrom<TreeSpec> for HybridTree {
    type Error = Error;
    fn try_from(spec: TreeSpec) -> Result<Self> {
        HybridTree::from_spec(&spec)
    }
}

impl From<HybridTree> for TreeSpec {
    fn from(tree: HybridTree) -> Self {
        tree.to_spec()
    }
}

impl HybridTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        let mut nodes = Vec::new();
        // explicit stack so deep trees cannot overflow
        let mut stack: Vec<(&TreeSpec, Option<usize>)> = vec![(spec, None)];
        while let Some((s, parent)) = stack.pop() {
            if !(0.0..=1.0).contains(&s.p) {
                return Err(Error::InvalidTree(format!("error probability {} outside [0, 1]", s.p)));
            }
            if s.kind == NodeKind::Deterministic && s.p != 0.0 {
                return Err(Error::InvalidTree(format!("deterministic node with p = {}", s.p)));
            }
            let id = nodes.len();
            nodes.push(Node { kind: s.kind, error_prob: s.p, children: Vec::with_capacity(s.children.len()) });
            if let Some(parent) = parent {
                nodes[parent].children.push(id);
            }
            stack.extend(s.children.iter().rev().map(|c| (c, Some(id))));
        }
        Ok(HybridTree { nodes })
    }

    pub fn to_spec(&self) -> TreeSpec {
        fn build(nodes: &[Node], id: usize) -> TreeSpec {
            let n = &nodes[id];
            TreeSpec { kind: n.kind, p: n.error_prob, children: n.children.iter().map(|&c| build(nodes, c)).collect() }
        }
        build(&self.nodes, 0)
    }

    /// Complete binary tree with `depth` levels of ML nodes, probabilities
    /// drawn in preorder from `p`.
    pub fn complete_binary(depth: usize, mut p: impl FnMut() -> f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::param("depth", "must be at least 1"));
        }
        fn build(level: usize, depth: usize, p: &mut dyn FnMut() -> f64) -> TreeSpec {
            let mut node = TreeSpec::leaf(NodeKind::Nondeterministic, p());
            if level + 1 < depth {
                node.children = (0..2).map(|_| build(level + 1, depth, p)).collect();
            }
            node
        }
        HybridTree::from_spec(&build(0, depth, &mut p))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Every root-to-leaf path, left to right.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            let children = &self.nodes[last].children;
            if children.is_empty() {
                out.push(path);
            } else {
                for &c in children.iter().rev() {
                    let mut next = path.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
        out
    }

    fn check_path(&self, path: &[usize]) -> Result<()> {
        match path.first() {
            Some(0) => {}
            Some(&v) => return Err(Error::InvalidPath(format!("path starts at node {v}, not the root"))),
            None => return Err(Error::InvalidPath("empty path".into())),
        }
        for w in path.windows(2) {
            if !self.nodes[w[0]].children.contains(&w[1]) {
                return Err(Error::InvalidPath(format!("node {} is not a child of node {}", w[1], w[0])));
            }
        }
        let last = *path.last().unwrap();
        if !self.nodes[last].children.is_empty() {
            return Err(Error::InvalidPath(format!("path ends at inner node {last}")));
        }
        Ok(())
    }
}

/// `prod (1 - p_v)` over the nodes of a root-to-leaf path.
pub fn path_correct_prob(tree: &HybridTree, path: &[usize]) -> Result<f64> {
    tree.check_path(path)?;
    // leaf-to-root, the same association order as `worst_path`
    Ok(path.iter().rev().fold(1.0, |acc, &v| (1.0 - tree.nodes[v].error_prob) * acc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPath {
    pub path: Vec<usize>,
    pub probability: f64,
}

/// Root-to-leaf path with the smallest probability of a correct decision;
/// ties go to the leftmost child.
pub fn worst_path(tree: &HybridTree) -> WorstPath {
    let n = tree.nodes.len();
    let mut best = vec![0.0; n];
    let mut choice = vec![usize::MAX; n];
    for v in (0..n).rev() {
        let node = &tree.nodes[v];
        let mut below = 1.0;
        for (i, &c) in node.children.iter().enumerate() {
            if i == 0 || best[c] < below {
                below = best[c];
                choice[v] = c;
            }
        }
        best[v] = (1.0 - node.error_prob) * below;
    }
    let mut path = vec![0];
    while choice[*path.last().unwrap()] != usize::MAX {
        path.push(choice[*path.last().unwrap()]);
    }
    WorstPath { path, probability: best[0] }
}

/// Probability of a correct decision when every inner node routes to a
/// uniformly random child.
pub fn random_walk_correct_prob(tree: &HybridTree) -> f64 {
    let mut value = vec![0.0; tree.nodes.len()];
    for v in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[v];
        let below = if node.children.is_empty() {
            1.0
        } else {
            node.children.iter().map(|&c| value[c]).sum::<f64>() / node.children.len() as f64
        };
        value[v] = (1.0 - node.error_prob) * below;
    }
    value[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "path", rename_all = "lowercase")]
pub enum PathPolicy {
    Fixed(Vec<usize>),
    /// The adversarial path from [`worst_path`].
    Worst,
    /// Uniformly random child at every inner node, per trial.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub trials: usize,
    pub correct: usize,
    pub rate: f64,
    /// Closed-form probability for the chosen policy.
    pub analytic: f64,
    pub interval: ControlInterval,
}

/// Monte Carlo estimate of the probability of a correct decision, with a
/// bootstrap control interval over the trial outcomes.
pub fn simulate_tree(
    tree: &HybridTree,
    policy: &PathPolicy,
    trials: usize,
    replicates: usize,
    trim: f64,
    seed: u64,
) -> Result<Simulation> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewObservations { needed: MIN_TRIALS, got: trials });
    }
    let fixed = match policy {
        PathPolicy::Fixed(path) => {
            tree.check_path(path)?;
            Some(path.clone())
        }
        PathPolicy::Worst => Some(worst_path(tree).path),
        PathPolicy::Random => None,
    };
    let analytic = match &fixed {
        Some(path) => path_correct_prob(tree, path)?,
        None => random_walk_correct_prob(tree),
    };
    let trial_seed = derive_seed(seed, 0);
    let outcomes: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(trial_seed, t);
            let ok = match &fixed {
                Some(path) => path.iter().all(|&v| rng.gen::<f64>() >= tree.nodes[v].error_prob),
                None => {
                    let mut v = 0;
                    loop {
                        let node = &tree.nodes[v];
                        if rng.gen::<f64>() < node.error_prob {
                            break false;
                        }
                        if node.children.is_empty() {
                            break true;
                        }
                        v = node.children[rng.gen_range(0..node.children.len())];
                    }
                }
            };
            if ok { 1.0 } else { 0.0 }
        })
        .collect();
    let correct = outcomes.iter().filter(|&&x| x == 1.0).count();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let interval = bootstrap_interval_with(&outcomes, mean, replicates, trim, derive_seed(seed, 1))?;
    Ok(Simulation { trials, correct, rate: correct as f64 / trials as f64, analytic, interval })
}
