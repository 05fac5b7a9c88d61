//! CART regression tree: binary SSE-minimizing splits on midpoint
//! thresholds, with configurable stopping criteria.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::seed::child_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// None = grow until exhausted.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Drives per-node feature subsampling when a subset size is requested.
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        count: usize,
        node_sse: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        prediction: f64,
        count: usize,
        node_sse: f64,
    },
}

impl TreeNode {
    pub fn count(&self) -> usize {
        match self {
            TreeNode::Internal { count, .. } | TreeNode::Leaf { count, .. } => *count,
        }
    }

    pub fn sse(&self) -> f64 {
        match self {
            TreeNode::Internal { node_sse, .. } | TreeNode::Leaf { node_sse, .. } => *node_sse,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub root: TreeNode,
    pub depth: usize,
    pub leaf_count: usize,
    pub feature_names: Vec<String>,
    /// Sum of leaf SSEs, i.e. the SSE of predicting every training row.
    pub training_sse: f64,
}

struct Builder<'a> {
    columns: Vec<&'a [f64]>,
    y: &'a [f64],
    cfg: &'a TreeConfig,
    subset_size: usize,
    rng: ChaCha8Rng,
}

struct NodeStats {
    mean: f64,
    sse: f64,
}

fn node_stats(y: &[f64], indices: &[usize]) -> NodeStats {
    let n = indices.len() as f64;
    let mean = indices.iter().map(|&i| y[i]).sum::<f64>() / n;
    let sse = indices.iter().map(|&i| (y[i] - mean).powi(2)).sum();
    NodeStats { mean, sse }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    child_sse: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl<'a> Builder<'a> {
    /// Best (feature, threshold) by total child SSE over the considered
    /// features. Scanning features in ascending index and thresholds in
    /// ascending value makes ties resolve to the lowest feature index, then
    /// the lowest threshold.
    fn best_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let n_features = self.columns.len();
        let considered: Vec<usize> = if self.subset_size >= n_features {
            (0..n_features).collect()
        } else {
            let mut picked =
                rand::seq::index::sample(&mut self.rng, n_features, self.subset_size)
                    .into_vec();
            picked.sort_unstable();
            picked
        };

        let node = node_stats(self.y, indices);
        let mut best: Option<BestSplit> = None;

        for &f in &considered {
            let col = self.columns[f];
            let mut order: Vec<usize> = indices.to_vec();
            order.sort_by(|&a, &b| {
                col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b))
            });

            // Prefix sums of the node-centered responses; centering keeps
            // the incremental SSE numerically tame.
            let m = order.len();
            let mut prefix_sum = vec![0.0; m + 1];
            let mut prefix_sq = vec![0.0; m + 1];
            for (i, &row) in order.iter().enumerate() {
                let v = self.y[row] - node.mean;
                prefix_sum[i + 1] = prefix_sum[i] + v;
                prefix_sq[i + 1] = prefix_sq[i] + v * v;
            }

            for pos in 1..m {
                if col[order[pos - 1]] == col[order[pos]] {
                    continue; // threshold only between distinct values
                }
                let n_left = pos;
                let n_right = m - pos;
                if n_left < self.cfg.min_samples_leaf || n_right < self.cfg.min_samples_leaf {
                    continue;
                }
                let sum_l = prefix_sum[pos];
                let sse_l = prefix_sq[pos] - sum_l * sum_l / n_left as f64;
                let sum_r = prefix_sum[m] - sum_l;
                let sse_r = (prefix_sq[m] - prefix_sq[pos]) - sum_r * sum_r / n_right as f64;
                let child_sse = sse_l.max(0.0) + sse_r.max(0.0);

                if best.as_ref().is_none_or(|b| child_sse < b.child_sse) {
                    let threshold = 0.5 * (col[order[pos - 1]] + col[order[pos]]);
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        child_sse,
                        left: order[..pos].to_vec(),
                        right: order[pos..].to_vec(),
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, indices: &[usize], depth: usize) -> TreeNode {
        let stats = node_stats(self.y, indices);
        let leaf = |s: &NodeStats| TreeNode::Leaf {
            prediction: s.mean,
            count: indices.len(),
            node_sse: s.sse,
        };

        let depth_ok = self.cfg.max_depth.is_none_or(|d| depth < d);
        let all_equal = indices
            .iter()
            .all(|&i| self.y[i] == self.y[indices[0]]);
        if !depth_ok || indices.len() < self.cfg.min_samples_split || all_equal {
            return leaf(&stats);
        }

        let Some(split) = self.best_split(indices) else {
            return leaf(&stats);
        };
        // Splits must strictly decrease SSE.
        if split.child_sse >= stats.sse * (1.0 - 1e-12) {
            return leaf(&stats);
        }

        let left = self.build(&split.left, depth + 1);
        let right = self.build(&split.right, depth + 1);
        TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            count: indices.len(),
            node_sse: stats.sse,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

fn measure(node: &TreeNode) -> (usize, usize, f64) {
    match node {
        TreeNode::Leaf { node_sse, .. } => (0, 1, *node_sse),
        TreeNode::Internal { left, right, .. } => {
            let (dl, ll, sl) = measure(left);
            let (dr, lr, sr) = measure(right);
            (1 + dl.max(dr), ll + lr, sl + sr)
        }
    }
}

/// Fit a CART regression tree. `feature_subset_size` of None considers all
/// features at every node; Some(m) considers a seeded random subset of m.
pub fn tree_fit(
    features: &[(&str, &[f64])],
    y: &[f64],
    cfg: &TreeConfig,
    feature_subset_size: Option<usize>,
) -> Result<RegressionTree> {
    if y.is_empty() || features.is_empty() {
        return Err(Error::EmptyTrainingData);
    }
    for (_, col) in features {
        if col.len() != y.len() {
            return Err(Error::LengthMismatch(y.len(), col.len()));
        }
    }
    let subset_size = feature_subset_size
        .unwrap_or(features.len())
        .clamp(1, features.len());

    let mut builder = Builder {
        columns: features.iter().map(|(_, c)| *c).collect(),
        y,
        cfg,
        subset_size,
        rng: ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, 0)),
    };
    let indices: Vec<usize> = (0..y.len()).collect();
    let root = builder.build(&indices, 0);
    let (depth, leaf_count, training_sse) = measure(&root);

    Ok(RegressionTree {
        root,
        depth,
        leaf_count,
        feature_names: features.iter().map(|(n, _)| n.to_string()).collect(),
        training_sse,
    })
}

/// Route a feature vector to its leaf (values <= threshold go left).
pub fn tree_predict(tree: &RegressionTree, features: &[f64]) -> Result<f64> {
    if features.len() != tree.feature_names.len() {
        return Err(Error::ArityMismatch {
            expected: tree.feature_names.len(),
            got: features.len(),
        });
    }
    if let Some(i) = features.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature(i));
    }
    let mut node = &tree.root;
    loop {
        match node {
            TreeNode::Leaf { prediction, .. } => return Ok(*prediction),
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                node = if features[*feature] <= *threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}

impl RegressionTree {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        tree_predict(self, features)
    }

    /// Nested JSON for inspection and golden tests.
    pub fn to_json(&self) -> serde_json::Value {
        fn node_json(node: &TreeNode, names: &[String]) -> serde_json::Value {
            match node {
                TreeNode::Leaf {
                    prediction, count, ..
                } => json!({ "value": prediction, "count": count }),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => json!({
                    "feature": names[*feature],
                    "threshold": threshold,
                    "left": node_json(left, names),
                    "right": node_json(right, names),
                }),
            }
        }
        json!({
            "feature_names": self.feature_names,
            "depth": self.depth,
            "leaf_count": self.leaf_count,
            "training_sse": self.training_sse,
            "root": node_json(&self.root, &self.feature_names),
        })
    }
}
