//! End-to-end pipeline behavior: determinism, artifact contents, flag
//! derivation, and the plot-data file contracts.

use std::fs;
use std::path::Path;

use regkit_cli::config::{InputSource, PipelineConfig};
use regkit_cli::pipeline::{derive_flags, run_pipeline, PipelineArtifacts};

fn test_config(seed: u64, dir: &Path) -> PipelineConfig {
    PipelineConfig {
        input: InputSource::Synthetic { rows: 124 },
        seed,
        response: "d80".into(),
        output_dir: dir.to_path_buf(),
        ..PipelineConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn same_config_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    run_pipeline(&test_config(7, &dir_a)).unwrap();
    run_pipeline(&test_config(7, &dir_b)).unwrap();

    let mut names: Vec<String> = fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"comparison.json".to_string()));
    for name in &names {
        let a = fs::read(dir_a.join(name)).unwrap();
        let b = fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn different_seeds_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_pipeline(&test_config(1, &tmp.path().join("a"))).unwrap();
    let b = run_pipeline(&test_config(2, &tmp.path().join("b"))).unwrap();
    assert_ne!(
        a.report.rows[0].training_accuracy_pct,
        b.report.rows[0].training_accuracy_pct
    );
}

#[test]
fn four_rows_in_fixed_order() {
    let tmp = tempfile::tempdir().unwrap();
    let art = run_pipeline(&test_config(3, tmp.path())).unwrap();
    let models: Vec<&str> = art.report.rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(
        models,
        ["MLR-raw", "MLR-transformed-stepwise", "DecisionTree", "RFR"]
    );
}

#[test]
fn flags_rederivable_from_serialized_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = test_config(5, tmp.path());
    run_pipeline(&cfg).unwrap();

    let comparison: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "comparison.json")).unwrap();
    let details: [(usize, &str); 2] = [(0, "mlr_raw.json"), (1, "mlr_transformed.json")];
    for (row_idx, file) in details {
        let detail: serde_json::Value = serde_json::from_str(&read(tmp.path(), file)).unwrap();
        let row = &comparison["rows"][row_idx];

        let max_vif = detail["report"]["coefficients"]
            .as_array()
            .unwrap()
            .iter()
            .filter_map(|c| c["VIF"].as_f64())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let has_outlier = !detail["diagnostics"]["flagged_outliers"]
            .as_array()
            .unwrap()
            .is_empty();
        let (overfit, multi, outlier) = derive_flags(
            row["training_accuracy_pct"].as_f64().unwrap(),
            row["validation_accuracy_pct"].as_f64().unwrap(),
            cfg.overfit_gap,
            max_vif,
            has_outlier,
        );
        assert_eq!(row["overfit_flag"].as_bool().unwrap(), overfit, "{file}");
        assert_eq!(
            row["multicollinearity_flag"].as_bool().unwrap(),
            multi,
            "{file}"
        );
        assert_eq!(row["outlier_flag"].as_bool().unwrap(), outlier, "{file}");
    }
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn plot_data_contracts() {
    let tmp = tempfile::tempdir().unwrap();
    let art: PipelineArtifacts = run_pipeline(&test_config(9, tmp.path())).unwrap();

    // Importances sum to 1.
    let rows = parse_csv(&read(tmp.path(), "importance_rfr.csv"));
    let total: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-9, "importance sum {total}");

    // Tree-model predicted-vs-actual files hold exactly the test rows.
    for name in ["predicted_vs_actual_tree.csv", "predicted_vs_actual_forest.csv"] {
        let rows = parse_csv(&read(tmp.path(), name));
        assert_eq!(rows.len(), 24, "{name} row count");
    }
    // MLR files hold the full fitted data.
    let rows = parse_csv(&read(tmp.path(), "predicted_vs_actual_mlr_raw.csv"));
    assert_eq!(rows.len(), 124);

    // Residual file quantiles strictly increase.
    let rows = parse_csv(&read(tmp.path(), "residuals_mlr2.csv"));
    assert_eq!(rows.len(), 124);
    let quantiles: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    for w in quantiles.windows(2) {
        assert!(w[0] < w[1], "quantiles must strictly increase");
    }

    // The artifacts mirror the files.
    assert_eq!(art.report.rows.len(), 4);
    assert_eq!(art.tree.test_actual.len(), 24);
}

#[test]
fn transformed_response_reports_both_scales() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = test_config(11, tmp.path());
    // Explicit per-column map including the response.
    cfg.transform_map = regkit_cli::config::TransformMap::Columns(vec![
        "d98".into(),
        "d97".into(),
        "d80".into(),
    ]);
    let art = run_pipeline(&cfg).unwrap();
    assert!(art
        .mlr_transformed
        .transforms
        .iter()
        .any(|t| t.column == "d80"));
    assert!(art.mlr_transformed.eval_raw_scale.is_some());
    let raw_eval = art.mlr_transformed.eval_raw_scale.as_ref().unwrap();
    assert!(raw_eval.r2 > 0.0 && raw_eval.r2 <= 1.0);
    // The fitted-scale numbers are on the transformed response.
    assert_ne!(
        art.mlr_transformed.eval_fitted_scale.rmse,
        raw_eval.rmse
    );
}

#[test]
fn transform_map_off_degenerates_to_raw() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = test_config(13, tmp.path());
    cfg.transform_map = regkit_cli::config::TransformMap::Off;
    let art = run_pipeline(&cfg).unwrap();
    let raw = &art.report.rows[0];
    let t = &art.report.rows[1];
    assert_eq!(raw.training_accuracy_pct, t.training_accuracy_pct);
    assert!(art.mlr_transformed.transforms.is_empty());
}

#[test]
fn csv_input_round_trips_through_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    // First produce a synthetic CSV, then feed it back as file input.
    let synth_cfg = test_config(17, &tmp.path().join("synth"));
    run_pipeline(&synth_cfg).unwrap();
    let csv_path = tmp.path().join("synth").join("synthetic.csv");

    let cfg = PipelineConfig {
        input: InputSource::Path(csv_path),
        seed: 17,
        response: "d80".into(),
        output_dir: tmp.path().join("fromcsv"),
        ..PipelineConfig::default()
    };
    let art = run_pipeline(&cfg).unwrap();
    assert_eq!(art.report.rows.len(), 4);
}
