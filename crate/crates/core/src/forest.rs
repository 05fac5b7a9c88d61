//! Random-forest regression: bootstrap-aggregated CART trees with per-node
//! feature subsetting, out-of-bag validation and impurity-based feature
//! importance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::seed::child_seed;
use crate::tree::{tree_fit, RegressionTree, TreeConfig, TreeNode};

/// Per-node feature subsetting rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    /// Consider every feature at every node.
    All,
    /// floor(sqrt(feature count)), with a floor of 1.
    Sqrt,
    /// An explicit per-node feature count.
    Count(usize),
}

impl FeatureSubset {
    pub fn size(&self, n_features: usize) -> usize {
        match self {
            FeatureSubset::All => n_features,
            FeatureSubset::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            FeatureSubset::Count(k) => (*k).clamp(1, n_features),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub feature_subset: FeatureSubset,
    pub tree_cfg: TreeConfig,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            feature_subset: FeatureSubset::All,
            tree_cfg: TreeConfig::default(),
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
    /// Per tree, the sorted row indices that were out of bag.
    pub oob_membership: Vec<Vec<usize>>,
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OobReport {
    pub oob_r2: f64,
    pub oob_rmse: f64,
    /// Rows that were out of bag in at least one tree.
    pub covered_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureImportance {
    /// (feature name, importance) pairs, normalized to sum 1.
    pub items: Vec<(String, f64)>,
    /// True when no split was ever made and the uniform fallback applies.
    pub uniform_fallback: bool,
}

/// Fit a random forest. Tree `i` derives its own seed from (master seed, i),
/// so the result is independent of thread count and adding trees never
/// changes existing ones.
pub fn forest_fit(
    features: &[(&str, &[f64])],
    y: &[f64],
    cfg: &ForestConfig,
) -> Result<RandomForest> {
    let n = y.len();
    if n < 2 || features.is_empty() {
        return Err(Error::EmptyTrainingData);
    }
    if cfg.n_trees == 0 {
        return Err(Error::Invalid("forest needs at least one tree".into()));
    }
    for (_, col) in features {
        if col.len() != n {
            return Err(Error::LengthMismatch(n, col.len()));
        }
    }
    let subset_size = cfg.feature_subset.size(features.len());

    let results: Result<Vec<(RegressionTree, Vec<usize>)>> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let tree_seed = child_seed(cfg.seed, i as u64);
            let (rows, oob) = if cfg.bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(child_seed(tree_seed, 0));
                let mut in_bag = vec![false; n];
                let rows: Vec<usize> = (0..n)
                    .map(|_| {
                        let r = rng.gen_range(0..n);
                        in_bag[r] = true;
                        r
                    })
                    .collect();
                let oob: Vec<usize> = (0..n).filter(|&r| !in_bag[r]).collect();
                (rows, oob)
            } else {
                ((0..n).collect(), Vec::new())
            };

            let cols: Vec<(String, Vec<f64>)> = features
                .iter()
                .map(|(name, col)| {
                    (
                        name.to_string(),
                        rows.iter().map(|&r| col[r]).collect::<Vec<f64>>(),
                    )
                })
                .collect();
            let col_views: Vec<(&str, &[f64])> = cols
                .iter()
                .map(|(name, col)| (name.as_str(), col.as_slice()))
                .collect();
            let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();

            let tree_cfg = TreeConfig {
                seed: child_seed(tree_seed, 1),
                ..cfg.tree_cfg.clone()
            };
            let subset = if subset_size < features.len() {
                Some(subset_size)
            } else {
                None
            };
            let tree = tree_fit(&col_views, &ys, &tree_cfg, subset)?;
            Ok((tree, oob))
        })
        .collect();

    let (trees, oob_membership): (Vec<_>, Vec<_>) = results?.into_iter().unzip();
    Ok(RandomForest {
        trees,
        oob_membership,
        config: cfg.clone(),
        feature_names: features.iter().map(|(n, _)| n.to_string()).collect(),
    })
}

/// Unweighted mean of the per-tree predictions.
pub fn forest_predict(forest: &RandomForest, features: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for tree in &forest.trees {
        acc += tree.predict(features)?;
    }
    Ok(acc / forest.trees.len() as f64)
}

/// Out-of-bag validation: each covered row is predicted only by trees whose
/// bootstrap sample excluded it.
pub fn oob_score(forest: &RandomForest, features: &[(&str, &[f64])], y: &[f64]) -> Result<OobReport> {
    if !forest.config.bootstrap {
        return Err(Error::OobUndefined);
    }
    let n = y.len();
    let mut sum = vec![0.0; n];
    let mut hits = vec![0usize; n];
    let mut row_buf = vec![0.0; features.len()];
    for (tree, oob) in forest.trees.iter().zip(&forest.oob_membership) {
        for &row in oob {
            if row >= n {
                return Err(Error::Invalid("OOB row out of range".into()));
            }
            for (j, (_, col)) in features.iter().enumerate() {
                row_buf[j] = col[row];
            }
            sum[row] += tree.predict(&row_buf)?;
            hits[row] += 1;
        }
    }

    let covered: Vec<usize> = (0..n).filter(|&r| hits[r] > 0).collect();
    if covered.len() < 2 {
        return Err(Error::Invalid(
            "not enough out-of-bag coverage to score".into(),
        ));
    }
    let actual: Vec<f64> = covered.iter().map(|&r| y[r]).collect();
    let predicted: Vec<f64> = covered.iter().map(|&r| sum[r] / hits[r] as f64).collect();
    Ok(OobReport {
        oob_r2: crate::metrics::r2_score(&actual, &predicted)?,
        oob_rmse: crate::metrics::rmse(&actual, &predicted)?,
        covered_rows: covered.len(),
    })
}

/// Mean decrease in impurity: each split credits its feature with
/// parent SSE minus the two child SSEs, summed over every tree and
/// normalized to 1. A forest with no splits at all falls back to uniform
/// importances.
pub fn feature_importance(forest: &RandomForest) -> FeatureImportance {
    let k = forest.feature_names.len();
    let mut raw = vec![0.0; k];
    fn walk(node: &TreeNode, raw: &mut [f64]) {
        if let TreeNode::Internal {
            feature,
            node_sse,
            left,
            right,
            ..
        } = node
        {
            let decrease = (node_sse - (left.sse() + right.sse())).max(0.0);
            raw[*feature] += decrease;
            walk(left, raw);
            walk(right, raw);
        }
    }
    for tree in &forest.trees {
        walk(&tree.root, &mut raw);
    }
    let total: f64 = raw.iter().sum();
    let (items, uniform_fallback) = if total > 0.0 {
        (
            forest
                .feature_names
                .iter()
                .zip(&raw)
                .map(|(n, v)| (n.clone(), v / total))
                .collect(),
            false,
        )
    } else {
        (
            forest
                .feature_names
                .iter()
                .map(|n| (n.clone(), 1.0 / k as f64))
                .collect(),
            true,
        )
    };
    FeatureImportance {
        items,
        uniform_fallback,
    }
}

impl RandomForest {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        forest_predict(self, features)
    }

    /// Config plus per-tree JSON; stable field order so equal forests
    /// serialize byte-identically.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "config": serde_json::to_value(&self.config).unwrap(),
            "feature_names": self.feature_names,
            "oob_membership": self.oob_membership,
            "trees": self.trees.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, GeneratorProfile};

    fn step_data(n: usize) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| if *v < n as f64 / 2.0 { 1.0 } else { 9.0 })
            .collect();
        (x, y)
    }

    #[test]
    fn no_bootstrap_all_features_degenerates_to_cart() {
        let (x, y) = step_data(20);
        let cfg = ForestConfig {
            n_trees: 5,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        let single = tree_fit(&[("x", &x)], &y, &TreeConfig::default(), None).unwrap();
        for tree in &forest.trees {
            assert_eq!(tree.root, single.root);
        }
        for probe in [0.0, 3.3, 9.9, 15.0] {
            assert_eq!(
                forest.predict(&[probe]).unwrap(),
                single.predict(&[probe]).unwrap()
            );
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let ds = generate_synthetic(60, 5, &GeneratorProfile::default()).unwrap();
        let feats: Vec<(&str, &[f64])> = ["d99", "d98", "d97"]
            .iter()
            .map(|n| (*n, ds.column(n).unwrap()))
            .collect();
        let y = ds.column("d80").unwrap();
        let cfg = ForestConfig {
            n_trees: 20,
            seed: 11,
            ..ForestConfig::default()
        };
        let a = forest_fit(&feats, y, &cfg).unwrap();
        let b = forest_fit(&feats, y, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a.to_json()).unwrap(),
            serde_json::to_string(&b.to_json()).unwrap()
        );
    }

    #[test]
    fn oob_fraction_near_one_over_e() {
        let (x, y) = step_data(100);
        let cfg = ForestConfig {
            n_trees: 100,
            seed: 3,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        let mean_frac: f64 = forest
            .oob_membership
            .iter()
            .map(|oob| oob.len() as f64 / 100.0)
            .sum::<f64>()
            / forest.trees.len() as f64;
        assert!(
            (0.33..=0.41).contains(&mean_frac),
            "mean OOB fraction {mean_frac}"
        );
    }

    #[test]
    fn oob_requires_bootstrap() {
        let (x, y) = step_data(20);
        let cfg = ForestConfig {
            n_trees: 3,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        assert!(matches!(
            oob_score(&forest, &[("x", &x)], &y),
            Err(Error::OobUndefined)
        ));
    }

    #[test]
    fn oob_score_strong_on_clean_signal() {
        let (x, y) = step_data(100);
        let cfg = ForestConfig {
            n_trees: 50,
            seed: 1,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        let report = oob_score(&forest, &[("x", &x)], &y).unwrap();
        assert!(report.oob_r2 >= 0.9, "oob r2 = {}", report.oob_r2);
        assert!(report.covered_rows <= 100);
    }

    #[test]
    fn single_tree_oob_set_matches_membership() {
        let (x, y) = step_data(30);
        let cfg = ForestConfig {
            n_trees: 1,
            seed: 9,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        let report = oob_score(&forest, &[("x", &x)], &y).unwrap();
        assert_eq!(report.covered_rows, forest.oob_membership[0].len());
    }

    #[test]
    fn predictions_stay_within_training_range() {
        let ds = generate_synthetic(80, 2, &GeneratorProfile::default()).unwrap();
        let feats: Vec<(&str, &[f64])> = ["d99", "d98", "d97"]
            .iter()
            .map(|n| (*n, ds.column(n).unwrap()))
            .collect();
        let y = ds.column("d80").unwrap();
        let cfg = ForestConfig {
            n_trees: 30,
            seed: 4,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&feats, y, &cfg).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..ds.n_rows() {
            let row: Vec<f64> = feats.iter().map(|(_, c)| c[i] * 1.3).collect();
            let p = forest.predict(&row).unwrap();
            assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    #[test]
    fn importance_normalized_and_signal_dominant() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 120;
        let mut draw = || -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let bits: u64 = rng.gen();
                    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
                })
                .collect()
        };
        let x1 = draw();
        let x2 = draw();
        let x3 = draw();
        let y: Vec<f64> = x1.iter().map(|v| (v * 10.0).floor()).collect();
        let cfg = ForestConfig {
            n_trees: 30,
            seed: 2,
            ..ForestConfig::default()
        };
        let forest =
            forest_fit(&[("x1", &x1), ("x2", &x2), ("x3", &x3)], &y, &cfg).unwrap();
        let imp = feature_importance(&forest);
        let total: f64 = imp.items.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(!imp.uniform_fallback);
        assert!(imp.items[0].1 > 0.8, "importance(x1) = {}", imp.items[0].1);
    }

    #[test]
    fn importance_uniform_fallback_for_stumps() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y = vec![5.0, 5.0, 5.0, 5.0]; // constant: no split ever
        let cfg = ForestConfig {
            n_trees: 4,
            seed: 0,
            ..ForestConfig::default()
        };
        let forest = forest_fit(&[("x", &x)], &y, &cfg).unwrap();
        let imp = feature_importance(&forest);
        assert!(imp.uniform_fallback);
        assert_eq!(imp.items[0].1, 1.0);
    }

    #[test]
    fn two_trees_average() {
        // Force two different trees by bootstrap, then check the mean rule
        // on a handcrafted pair instead: one tree trained on y, one on y+10.
        let (x, y) = step_data(16);
        let y_hi: Vec<f64> = y.iter().map(|v| v + 10.0).collect();
        let t1 = tree_fit(&[("x", &x)], &y, &TreeConfig::default(), None).unwrap();
        let t2 = tree_fit(&[("x", &x)], &y_hi, &TreeConfig::default(), None).unwrap();
        let forest = RandomForest {
            trees: vec![t1, t2],
            oob_membership: vec![vec![], vec![]],
            config: ForestConfig {
                n_trees: 2,
                bootstrap: false,
                ..ForestConfig::default()
            },
            feature_names: vec!["x".into()],
        };
        assert_eq!(forest.predict(&[0.0]).unwrap(), 6.0); // (1 + 11) / 2
    }
}
