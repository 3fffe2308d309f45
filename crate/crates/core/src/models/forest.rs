//! Random forest of CART trees with weighted Gini splits.
//!
//! Each of the 100 trees trains on a bootstrap drawn with probability
//! proportional to the sample weights, searches `ceil(sqrt(d))` features
//! per node for the threshold minimizing weighted Gini impurity, and
//! grows to depth 12 unless a node goes pure or runs out of improving
//! splits first. A tree predicts the majority class of the reached leaf;
//! the forest probability is the fraction of trees voting positive, so
//! unanimous forests return exactly 0 or 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::models::{ModelInputs, ModelParams, TrainConfig};

pub const N_TREES: usize = 100;
pub const MAX_DEPTH: usize = 12;
const MIN_SAMPLES_SPLIT: usize = 2;

/// One arena-allocated decision node.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        vote: u8,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn vote(&self, row: &[f64]) -> u8 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { vote } => return *vote,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
}

impl ForestParams {
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        let n_trees = self.trees.len() as f64;
        rows.iter()
            .map(|row| {
                let votes: u32 = self.trees.iter().map(|t| u32::from(t.vote(row))).sum();
                f64::from(votes) / n_trees
            })
            .collect()
    }
}

struct TreeBuilder<'a> {
    inputs: &'a ModelInputs<'a>,
    mtry: usize,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    /// Builds the subtree over `samples` (bootstrap indices, repeats
    /// allowed) and returns its arena index.
    fn build(&mut self, samples: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let (pos_weight, total_weight) = self.class_weights(samples);
        let neg_weight = total_weight - pos_weight;

        let make_leaf = |nodes: &mut Vec<TreeNode>| {
            nodes.push(TreeNode::Leaf {
                vote: u8::from(pos_weight >= neg_weight),
            });
            nodes.len() - 1
        };

        if depth >= MAX_DEPTH
            || samples.len() < MIN_SAMPLES_SPLIT
            || pos_weight == 0.0
            || neg_weight == 0.0
            || total_weight == 0.0
        {
            return make_leaf(&mut self.nodes);
        }

        let parent_impurity = weighted_gini(pos_weight, total_weight);
        let Some((feature, threshold, score)) = self.best_split(samples, rng) else {
            return make_leaf(&mut self.nodes);
        };
        if score >= parent_impurity - 1e-12 {
            return make_leaf(&mut self.nodes);
        }

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.inputs.features[i][feature] <= threshold);
        if left_rows.is_empty() || right_rows.is_empty() {
            return make_leaf(&mut self.nodes);
        }

        // Reserve this node's slot before recursing so child indices are
        // stable.
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { vote: 0 });
        let left = self.build(&left_rows, depth + 1, rng);
        let right = self.build(&right_rows, depth + 1, rng);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn class_weights(&self, samples: &[usize]) -> (f64, f64) {
        let mut pos = 0.0;
        let mut total = 0.0;
        for &i in samples {
            let w = self.inputs.weight(i);
            total += w;
            if self.inputs.labels[i] == 1 {
                pos += w;
            }
        }
        (pos, total)
    }

    /// Best (feature, threshold) over an `mtry`-subset of features,
    /// scored by total weighted child impurity (normalized by node
    /// weight). Returns `None` when no feature admits a split.
    fn best_split(
        &self,
        samples: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64, f64)> {
        let d = self.inputs.n_features();
        // Partial Fisher-Yates: first `mtry` entries form the subset.
        let mut candidates: Vec<usize> = (0..d).collect();
        for k in 0..self.mtry.min(d) {
            let j = rng.gen_range(k..d);
            candidates.swap(k, j);
        }
        let mut best: Option<(usize, f64, f64)> = None;

        let mut column: Vec<(f64, f64, f64)> = Vec::with_capacity(samples.len());
        for &feature in &candidates[..self.mtry.min(d)] {
            column.clear();
            for &i in samples {
                let w = self.inputs.weight(i);
                column.push((
                    self.inputs.features[i][feature],
                    w,
                    if self.inputs.labels[i] == 1 { w } else { 0.0 },
                ));
            }
            column.sort_by(|a, b| a.0.total_cmp(&b.0));

            let total_weight: f64 = column.iter().map(|c| c.1).sum();
            let total_pos: f64 = column.iter().map(|c| c.2).sum();
            let mut left_weight = 0.0;
            let mut left_pos = 0.0;
            for window in 0..column.len() - 1 {
                left_weight += column[window].1;
                left_pos += column[window].2;
                let (value, next_value) = (column[window].0, column[window + 1].0);
                if value == next_value {
                    continue;
                }
                let right_weight = total_weight - left_weight;
                let right_pos = total_pos - left_pos;
                if left_weight == 0.0 || right_weight == 0.0 {
                    continue;
                }
                let score = (left_weight * weighted_gini(left_pos, left_weight)
                    + right_weight * weighted_gini(right_pos, right_weight))
                    / total_weight;
                if best.map_or(true, |(_, _, s)| score < s) {
                    best = Some((feature, (value + next_value) / 2.0, score));
                }
            }
        }
        best
    }
}

/// Gini impurity of a node holding `pos` positive weight out of `total`.
fn weighted_gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let q = 1.0 - p;
    1.0 - p * p - q * q
}

pub(crate) fn fit(inputs: &ModelInputs<'_>, cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>)> {
    let n = inputs.n_rows();
    let d = inputs.n_features();
    let mtry = (d as f64).sqrt().ceil() as usize;

    // Cumulative weights make the bootstrap draws weight-proportional.
    let mut cumulative = Vec::with_capacity(n);
    let mut running = 0.0;
    for i in 0..n {
        running += inputs.weight(i);
        cumulative.push(running);
    }
    let total_weight = running;

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trees = Vec::with_capacity(N_TREES);
    for _ in 0..N_TREES {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let samples: Vec<usize> = (0..n)
            .map(|_| {
                let r = rng.gen_range(0.0..total_weight);
                cumulative.partition_point(|&c| c <= r).min(n - 1)
            })
            .collect();
        let mut builder = TreeBuilder {
            inputs,
            mtry,
            nodes: Vec::new(),
        };
        builder.build(&samples, 0, &mut rng);
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }
    Ok((ModelParams::Forest(ForestParams { trees }), Vec::new()))
}
