//! Random forest regression built from scratch.
//!
//! Each tree trains on a bootstrap resample (seeded by the run seed plus
//! the tree index, so any tree can be rebuilt in isolation) and grows
//! best-first: the candidate split with the largest sum-of-squared-error
//! reduction anywhere in the tree is applied next, which makes a terminal
//! node cap meaningful. Splits consider `nf` randomly drawn features and
//! pick the threshold minimizing total child SSE; exact ties resolve to the
//! lowest feature index, then the lowest threshold, so rebuilds are
//! bit-for-bit identical.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

use super::FitError;
use crate::util::{population_sd, seeded_rng};

const TREE_SEED_STREAM: u64 = 0x5452_4545;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfrParams {
    pub trees: usize,
    /// Features examined per split; values above the data's feature count
    /// are clamped to it at fit time.
    pub nf: usize,
    /// Minimum samples a terminal node may hold.
    pub min_ts: usize,
    /// Cap on terminal nodes per tree; `None` grows without limit.
    pub max_tn: Option<usize>,
    /// Disable to train every tree on the full sample (bagging off); used
    /// when a single deterministic tree is wanted.
    pub bootstrap: bool,
}

impl RfrParams {
    pub fn new(trees: usize, nf: usize, min_ts: usize, max_tn: Option<usize>) -> Self {
        RfrParams { trees, nf, min_ts, max_tn, bootstrap: true }
    }

    fn validate(&self) -> Result<(), FitError> {
        if self.trees == 0 || self.nf == 0 || self.min_ts == 0 {
            return Err(FitError::BadConfig(
                "tree count, features per split, and terminal size must be positive".into(),
            ));
        }
        if self.max_tn == Some(0) {
            return Err(FitError::BadConfig("terminal node cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfrModel {
    pub trees: Vec<Tree>,
    pub y_min: f64,
    pub y_max: f64,
}

impl RfrModel {
    /// Forest prediction: the mean of per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }

    pub fn tree_predictions(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }

    /// Mean and population spread of the per-tree predictions; the spread
    /// is the surrogate's uncertainty signal.
    pub fn predict_with_spread(&self, x: &[f64]) -> (f64, f64) {
        let preds = self.tree_predictions(x);
        let mean = preds.iter().sum::<f64>() / preds.len() as f64;
        (mean, population_sd(&preds))
    }
}

/// A grown-but-unsplit node: its members plus the best split found for it.
struct Candidate {
    gain: f64,
    seq: usize,
    node: usize,
    feature: usize,
    threshold: f64,
    members: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.seq == other.seq
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap on gain; earlier-created node wins ties.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

/// Exhaustive best split over the given features, honoring `min_ts` on both
/// children. Features must arrive in ascending order for the tie rule.
fn best_split(
    xs: &[Vec<f64>],
    ys: &[f64],
    members: &[usize],
    features: &[usize],
    min_ts: usize,
) -> Option<BestSplit> {
    let m = members.len();
    if m < 2 * min_ts {
        return None;
    }
    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for &f in features {
        order.clear();
        order.extend_from_slice(members);
        order.sort_by(|&a, &b| xs[a][f].total_cmp(&xs[b][f]));

        // Prefix sums let every cut position cost O(1).
        let mut prefix_y = 0.0;
        let mut prefix_y2 = 0.0;
        let total_y: f64 = order.iter().map(|&i| ys[i]).sum();
        let total_y2: f64 = order.iter().map(|&i| ys[i] * ys[i]).sum();
        for cut in 0..m - 1 {
            let i = order[cut];
            prefix_y += ys[i];
            prefix_y2 += ys[i] * ys[i];
            let left_n = cut + 1;
            let right_n = m - left_n;
            if left_n < min_ts || right_n < min_ts {
                continue;
            }
            let v = xs[order[cut]][f];
            let v_next = xs[order[cut + 1]][f];
            if v == v_next {
                continue;
            }
            let mut threshold = 0.5 * (v + v_next);
            // Adjacent floats can round the midpoint up to v_next, which
            // would shift the partition; fall back to the left value.
            if threshold >= v_next {
                threshold = v;
            }
            let sse_left = prefix_y2 - prefix_y * prefix_y / left_n as f64;
            let right_y = total_y - prefix_y;
            let right_y2 = total_y2 - prefix_y2;
            let sse_right = right_y2 - right_y * right_y / right_n as f64;
            let children = sse_left + sse_right;
            let better = match &best {
                None => true,
                Some(b) => children < b.children_sse,
            };
            if better {
                best = Some(BestSplit { feature: f, threshold, children_sse: children });
            }
        }
    }
    best
}

fn node_sse(ys: &[f64], members: &[usize]) -> f64 {
    let m = members.len() as f64;
    let sum: f64 = members.iter().map(|&i| ys[i]).sum();
    let sum2: f64 = members.iter().map(|&i| ys[i] * ys[i]).sum();
    sum2 - sum * sum / m
}

fn leaf_value(ys: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&i| ys[i]).sum::<f64>() / members.len() as f64
}

/// Grows one tree on the provided sample indices.
fn grow_tree(
    xs: &[Vec<f64>],
    ys: &[f64],
    sample: Vec<usize>,
    nf: usize,
    min_ts: usize,
    max_tn: Option<usize>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Tree {
    let d = xs[0].len();
    let nf = nf.min(d);
    let cap = max_tn.unwrap_or(usize::MAX);
    let mut nodes = vec![TreeNode::Leaf { value: leaf_value(ys, &sample) }];
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut leaves = 1usize;

    let propose = |node: usize,
                       members: Vec<usize>,
                       seq: &mut usize,
                       rng: &mut rand_chacha::ChaCha8Rng,
                       heap: &mut BinaryHeap<Candidate>| {
        if members.len() < 2 * min_ts {
            return;
        }
        let sse = node_sse(ys, &members);
        if sse <= 0.0 {
            return;
        }
        let mut features = sample_features(d, nf, rng);
        features.sort_unstable();
        if let Some(split) = best_split(xs, ys, &members, &features, min_ts) {
            heap.push(Candidate {
                gain: sse - split.children_sse,
                seq: *seq,
                node,
                feature: split.feature,
                threshold: split.threshold,
                members,
            });
            *seq += 1;
        }
    };

    propose(0, sample, &mut seq, rng, &mut heap);

    while leaves < cap {
        let Some(cand) = heap.pop() else { break };
        let (left_members, right_members): (Vec<usize>, Vec<usize>) = cand
            .members
            .iter()
            .partition(|&&i| xs[i][cand.feature] <= cand.threshold);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { value: leaf_value(ys, &left_members) });
        let right = nodes.len();
        nodes.push(TreeNode::Leaf { value: leaf_value(ys, &right_members) });
        nodes[cand.node] = TreeNode::Split {
            feature: cand.feature,
            threshold: cand.threshold,
            left,
            right,
        };
        leaves += 1;
        propose(left, left_members, &mut seq, rng, &mut heap);
        propose(right, right_members, &mut seq, rng, &mut heap);
    }

    Tree { nodes }
}

/// `nf` distinct feature indices drawn without replacement.
fn sample_features(d: usize, nf: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
    if nf >= d {
        return (0..d).collect();
    }
    // Partial Fisher-Yates over an index pool.
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..nf {
        let j = rng.gen_range(i..d);
        pool.swap(i, j);
    }
    pool.truncate(nf);
    pool
}

/// Fits a forest. Deterministic in `(data, params, seed)`; tree `t` draws
/// its bootstrap and feature subsets from a stream seeded `seed + t`.
pub fn rfr_fit(
    xs: &[Vec<f64>],
    ys: &[f64],
    params: &RfrParams,
    seed: u64,
) -> Result<RfrModel, FitError> {
    params.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(FitError::BadData(format!(
            "need equal nonzero row counts, got {} features and {} responses",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    use rayon::prelude::*;
    let trees: Vec<Tree> = (0..params.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed.wrapping_add(t as u64), TREE_SEED_STREAM);
            let sample: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(xs, ys, sample, params.nf, params.min_ts, params.max_tn, &mut rng)
        })
        .collect();

    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RfrModel { trees, y_min, y_max })
}
