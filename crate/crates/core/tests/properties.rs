//! Property tests for the cross-cutting invariants: profiling consistency,
//! transform monotonicity and round trips, metric identities, regression
//! algebra, and tree/forest structural guarantees.

use proptest::prelude::*;

use regkit::dataset::{
    correlation_matrix, generate_synthetic, histogram, pearson, summarize, train_test_split,
    Dataset, GeneratorProfile, SplitSpec,
};
use regkit::forest::{feature_importance, forest_fit, ForestConfig};
use regkit::linreg::{ols_fit, press_r2pred};
use regkit::metrics::{mape, r2_score, rmse};
use regkit::transform::{boxcox_apply, boxcox_inverse};
use regkit::tree::{tree_fit, TreeConfig, TreeNode};

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

fn normals(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let bits: u64 = rng.gen();
            let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
            regkit::special::normal_quantile(u)
        })
        .collect()
}

proptest! {
    // Summarize then histogram: counts account for every observation.
    #[test]
    fn histogram_counts_match_summary_n(values in finite_vec(1..200), bins in 1..20usize) {
        let stats = summarize(&values).unwrap();
        let hist = histogram(&values, bins).unwrap();
        prop_assert_eq!(hist.counts.iter().sum::<usize>(), stats.n);
    }

    // Pearson correlation is invariant under positive affine rescaling.
    #[test]
    fn correlation_affine_invariant(
        xs in finite_vec(3..60),
        scale in 0.001..1e3f64,
        offset in -1e3..1e3f64,
    ) {
        let ys: Vec<f64> = xs.iter().rev().map(|v| v * 0.5 + 1.0).collect();
        prop_assume!(pearson(&xs, &ys).is_ok());
        let scaled: Vec<f64> = xs.iter().map(|v| scale * v + offset).collect();
        prop_assume!(scaled.iter().all(|v| v.is_finite()));
        let r0 = pearson(&xs, &ys).unwrap();
        let r1 = pearson(&scaled, &ys).unwrap();
        prop_assert!((r0 - r1).abs() <= 1e-9, "r changed from {r0} to {r1}");
    }

    // Train/test split partitions the row set.
    #[test]
    fn split_partitions_rows(n in 10..200usize, frac in 0.1..0.5f64, seed in any::<u64>()) {
        let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ds = Dataset::new(vec![("idx".into(), idx)]).unwrap();
        let (train, test) = train_test_split(
            &ds,
            &SplitSpec { test_fraction: frac, seed },
        ).unwrap();
        let mut seen: Vec<usize> = train
            .column("idx").unwrap().iter()
            .chain(test.column("idx").unwrap())
            .map(|v| *v as usize)
            .collect();
        seen.sort_unstable();
        let all: Vec<usize> = (0..n).collect();
        prop_assert_eq!(seen, all);
    }

    // Exponentiating a normal sample leaves a positively skewed sample.
    #[test]
    fn exponentiated_normal_is_right_skewed(seed in any::<u64>()) {
        let sample: Vec<f64> = normals(400, seed).iter().map(|v| v.exp()).collect();
        let stats = summarize(&sample).unwrap();
        prop_assert!(stats.skewness > 0.0, "skewness {}", stats.skewness);
    }

    // Box-Cox preserves strict ordering for any lambda.
    #[test]
    fn boxcox_is_monotone(
        mut values in prop::collection::vec(0.001..1e4f64, 2..50),
        lambda in -3.0..3.0f64,
    ) {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        prop_assume!(values.len() >= 2);
        let t = boxcox_apply(&values, lambda, 0.0, "y").unwrap();
        for w in t.values.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    // Apply then invert is the identity within 1e-9 relative. Restricted to
    // |lambda * ln(y)| <= 5: beyond that the transform value approaches its
    // asymptote at 1/|lambda| and f64 cannot represent enough of the
    // difference for any inverse to recover the input.
    #[test]
    fn boxcox_round_trip(
        values in prop::collection::vec(0.001..1e4f64, 1..50),
        lambda in -2.0..2.0f64,
    ) {
        let max_log = values.iter().map(|v| v.ln().abs()).fold(0.0, f64::max);
        prop_assume!(lambda.abs() * max_log <= 5.0);
        let t = boxcox_apply(&values, lambda, 0.0, "y").unwrap();
        let back = boxcox_inverse(&t).unwrap();
        for (orig, rec) in values.iter().zip(&back) {
            prop_assert!((orig - rec).abs() <= 1e-9 * orig.abs().max(1e-12));
        }
    }

    // Metric identities.
    #[test]
    fn metric_identities(values in finite_vec(2..100), shift in -10.0..10.0f64) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        prop_assume!(values.iter().any(|v| (v - mean).abs() > 1e-9));

        prop_assert_eq!(r2_score(&values, &values).unwrap(), 1.0);
        let mean_vec = vec![mean; values.len()];
        prop_assert!(r2_score(&values, &mean_vec).unwrap().abs() <= 1e-12);

        let pred: Vec<f64> = values.iter().map(|v| v * 0.9 + 0.3).collect();
        let shifted_a: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let shifted_p: Vec<f64> = pred.iter().map(|v| v + shift).collect();
        let d = (rmse(&values, &pred).unwrap() - rmse(&shifted_a, &shifted_p).unwrap()).abs();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn mape_scale_invariant(
        values in prop::collection::vec(0.1..1e3f64, 2..60),
        scale in 0.01..100.0f64,
    ) {
        let pred: Vec<f64> = values.iter().map(|v| v * 1.1).collect();
        let sa: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let sp: Vec<f64> = pred.iter().map(|v| v * scale).collect();
        let d = (mape(&values, &pred).unwrap() - mape(&sa, &sp).unwrap()).abs();
        prop_assert!(d <= 1e-12 * mape(&values, &pred).unwrap().max(1.0));
    }

    // Correlation of a positive affine function of the actuals is 1.
    #[test]
    fn correlation_of_affine_prediction_is_one(
        values in finite_vec(3..60),
        slope in 0.01..100.0f64,
        offset in -100.0..100.0f64,
    ) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        prop_assume!(values.iter().any(|v| (v - mean).abs() > 1e-6));
        let pred: Vec<f64> = values.iter().map(|v| slope * v + offset).collect();
        let r = pearson(&values, &pred).unwrap();
        prop_assert!((r - 1.0).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Residual orthogonality: X^T e vanishes for every fit with intercept.
    #[test]
    fn ols_residuals_orthogonal(seed in any::<u64>(), n in 8..40usize, k in 1..4usize) {
        let cols: Vec<Vec<f64>> = (0..k).map(|j| normals(n, seed ^ (j as u64 + 1))).collect();
        let y = normals(n, seed ^ 0xFFFF);
        let preds: Vec<(&str, &[f64])> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (["a", "b", "c", "d"][j], c.as_slice()))
            .collect();
        let fit = ols_fit(&preds, &y).unwrap();

        let x_norm: f64 = cols
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .max(1.0);
        let e_norm: f64 = fit.residuals.iter().map(|v| v * v).sum::<f64>().sqrt();
        for col in std::iter::once(&vec![1.0; n]).chain(cols.iter()) {
            let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            prop_assert!(
                dot.abs() <= 1e-8 * x_norm * e_norm.max(1e-12),
                "X^T e component {dot}"
            );
        }
    }

    // Adding a predictor never lowers R^2.
    #[test]
    fn r2_nondecreasing_in_nested_models(seed in any::<u64>(), n in 12..40usize) {
        let x1 = normals(n, seed ^ 1);
        let x2 = normals(n, seed ^ 2);
        let y = normals(n, seed ^ 3);
        let small = ols_fit(&[("x1", &x1)], &y).unwrap();
        let big = ols_fit(&[("x1", &x1), ("x2", &x2)], &y).unwrap();
        prop_assert!(big.r2 >= small.r2 - 1e-12);
    }

    // VIF from the auxiliary regression agrees with the variance-ratio form
    // VIF_j = se_j^2 (n-1) var(x_j) / s^2.
    #[test]
    fn vif_two_formulas_agree(seed in any::<u64>(), n in 15..50usize) {
        let x1 = normals(n, seed ^ 1);
        // Induce correlation.
        let x2: Vec<f64> = x1
            .iter()
            .zip(normals(n, seed ^ 2))
            .map(|(a, b)| 0.8 * a + 0.4 * b)
            .collect();
        let y = normals(n, seed ^ 3);
        let fit = ols_fit(&[("x1", &x1), ("x2", &x2)], &y).unwrap();
        prop_assume!(fit.s > 1e-9);
        for (j, col) in [&x1, &x2].iter().enumerate() {
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let alt = fit.se[j + 1].powi(2) * (n as f64 - 1.0) * var / (fit.s * fit.s);
            let rel = (alt - fit.vif[j]).abs() / fit.vif[j];
            prop_assert!(rel <= 1e-6, "vif {} vs {alt}", fit.vif[j]);
        }
    }

    // Hat-matrix PRESS equals the n-explicit-refit PRESS.
    #[test]
    fn press_matches_explicit_refits(seed in any::<u64>(), n in 10..30usize) {
        let x = normals(n, seed ^ 1);
        let y: Vec<f64> = x
            .iter()
            .zip(normals(n, seed ^ 2))
            .map(|(a, e)| 2.0 * a + 0.5 * e)
            .collect();
        let fit = ols_fit(&[("x", &x)], &y).unwrap();
        let (press, _) = press_r2pred(&fit).unwrap();

        let mut loo = 0.0;
        for i in 0..n {
            let xs: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let ys: Vec<f64> = y.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let f = ols_fit(&[("x", &xs)], &ys).unwrap();
            loo += (y[i] - f.predict(&[x[i]]).unwrap()).powi(2);
        }
        prop_assert!((press - loo).abs() <= 1e-8 * loo.max(1e-12));
    }

    // Tree structure: bounds respected, splits strictly reduce SSE, and the
    // fit is deterministic.
    #[test]
    fn tree_bounds_and_determinism(
        seed in any::<u64>(),
        n in 6..60usize,
        max_depth in 1..6usize,
        min_leaf in 1..4usize,
    ) {
        let x = normals(n, seed ^ 1);
        let y = normals(n, seed ^ 2);
        let cfg = TreeConfig {
            max_depth: Some(max_depth),
            min_samples_split: 2,
            min_samples_leaf: min_leaf,
            seed: 0,
        };
        let t1 = tree_fit(&[("x", &x)], &y, &cfg, None).unwrap();
        let t2 = tree_fit(&[("x", &x)], &y, &cfg, None).unwrap();
        prop_assert_eq!(&t1, &t2);
        prop_assert!(t1.depth <= max_depth);

        fn walk(node: &TreeNode, min_leaf: usize) -> Result<(), TestCaseError> {
            match node {
                TreeNode::Leaf { count, .. } => prop_assert!(*count >= min_leaf),
                TreeNode::Internal { node_sse, left, right, .. } => {
                    prop_assert!(left.sse() + right.sse() < *node_sse);
                    walk(left, min_leaf)?;
                    walk(right, min_leaf)?;
                }
            }
            Ok(())
        }
        if n >= min_leaf {
            walk(&t1.root, min_leaf)?;
        }
    }

    // Training-row predictions are invariant under a strictly monotone
    // transform of a feature (trees use only order statistics).
    #[test]
    fn tree_uses_only_order_statistics(seed in any::<u64>(), n in 6..40usize) {
        let x = normals(n, seed ^ 1);
        let y = normals(n, seed ^ 2);
        let cubed: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        let cfg = TreeConfig::default();
        let t_raw = tree_fit(&[("x", &x)], &y, &cfg, None).unwrap();
        let t_cubed = tree_fit(&[("x", &cubed)], &y, &cfg, None).unwrap();
        for i in 0..n {
            let a = t_raw.predict(&[x[i]]).unwrap();
            let b = t_cubed.predict(&[cubed[i]]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    // Forest importances are a probability vector; predictions stay inside
    // the training response range.
    #[test]
    fn forest_importance_and_range(seed in any::<u64>()) {
        let ds = generate_synthetic(40, seed, &GeneratorProfile::default()).unwrap();
        let feats: Vec<(&str, &[f64])> = ["d99", "d98", "d97"]
            .iter()
            .map(|n| (*n, ds.column(n).unwrap()))
            .collect();
        let y = ds.column("d80").unwrap();
        let cfg = ForestConfig { n_trees: 10, seed, ..ForestConfig::default() };
        let forest = forest_fit(&feats, y, &cfg).unwrap();

        let imp = feature_importance(&forest);
        let total: f64 = imp.items.iter().map(|(_, v)| v).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for (_, v) in &imp.items {
            prop_assert!(*v >= 0.0);
        }

        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..ds.n_rows() {
            let row: Vec<f64> = feats.iter().map(|(_, c)| c[i] * 1.5).collect();
            let p = forest.predict(&row).unwrap();
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    // Correlation matrix is invariant under positive affine rescaling of a
    // column.
    #[test]
    fn correlation_matrix_affine_invariant(seed in any::<u64>(), scale in 0.01..100.0f64) {
        let ds = generate_synthetic(30, seed, &GeneratorProfile::default()).unwrap();
        let names: Vec<String> = ["d99", "d98", "d97"].iter().map(|s| s.to_string()).collect();
        let base = correlation_matrix(&ds, &names).unwrap();
        let rescaled: Vec<f64> = ds
            .column("d98")
            .unwrap()
            .iter()
            .map(|v| scale * v + 1.0)
            .collect();
        let ds2 = ds.with_column("d98", rescaled).unwrap();
        let after = correlation_matrix(&ds2, &names).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((base.r[i][j] - after.r[i][j]).abs() <= 1e-9);
            }
        }
    }
}
