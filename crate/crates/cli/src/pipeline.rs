//! The four-model comparison pipeline: profile, transform, fit (two MLR
//! variants plus decision tree and random forest), compare, and emit
//! machine- and plot-friendly artifacts.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use regkit::dataset::{
    correlation_matrix, generate_synthetic, histogram, load_csv, skewness, summarize,
    train_test_split, CorrelationMatrix, Dataset, GeneratorProfile, Histogram, SplitSpec,
    SummaryStats,
};
use regkit::forest::{
    feature_importance, forest_fit, oob_score, FeatureImportance, ForestConfig, OobReport,
};
use regkit::linreg::{
    anova, fit_report, kfold_cv, residual_diagnostics, stepwise_select, CvResult, FitReport,
    OlsFit, ResidualDiagnostics, StepwiseConfig,
};
use regkit::metrics::{evaluate, EvalResult};
use regkit::seed::child_seed;
use regkit::transform::{boxcox_apply, boxcox_inverse, boxcox_optimal_lambda, TransformedColumn};
use regkit::tree::{tree_fit, RegressionTree, TreeConfig};

use crate::config::{InputSource, PipelineConfig, TransformMap};

/// Seed streams derived from the master seed; fixed so that results never
/// depend on stage ordering.
mod stream {
    pub const SYNTH: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const CV_RAW: u64 = 3;
    pub const CV_TRANSFORMED: u64 = 4;
    pub const TREE: u64 = 5;
    pub const FOREST: u64 = 6;
}

/// Skewness beyond which `TransformMap::Auto` transforms a column (the
/// +-0.80 normality band).
pub const AUTO_SKEW_THRESHOLD: f64 = 0.80;

/// VIF above this flags multicollinearity.
pub const VIF_FLAG_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: String,
    pub training_accuracy_pct: f64,
    pub validation_accuracy_pct: f64,
    pub correlation: f64,
    pub overfit_flag: bool,
    pub multicollinearity_flag: bool,
    pub outlier_flag: bool,
}

/// The four-model side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ModelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformRecord {
    pub column: String,
    pub transformed_name: String,
    pub lambda: f64,
    pub shift: f64,
    pub source_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MlrDetail {
    pub report: FitReport,
    pub diagnostics: ResidualDiagnostics,
    /// Metrics of fitted vs actual on the scale the model was fit on.
    pub eval_fitted_scale: EvalResult,
    /// Metrics after inverting the response transform; present only when
    /// the response was transformed.
    pub eval_raw_scale: Option<EvalResult>,
    pub transforms: Vec<TransformRecord>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeDetail {
    pub train_eval: EvalResult,
    pub test_eval: EvalResult,
    pub depth: usize,
    pub leaf_count: usize,
    pub training_sse: f64,
    pub test_actual: Vec<f64>,
    pub test_predicted: Vec<f64>,
    pub model: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForestDetail {
    pub n_trees: usize,
    pub feature_subset: String,
    pub train_eval: EvalResult,
    pub test_eval: EvalResult,
    pub oob: OobReport,
    pub importance: FeatureImportance,
    pub test_actual: Vec<f64>,
    pub test_predicted: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileArtifacts {
    pub summaries: Vec<(String, SummaryStats)>,
    pub histograms: Vec<(String, Histogram)>,
    pub correlation: CorrelationMatrix,
}

/// Everything the pipeline produced, for callers that want more than files.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineArtifacts {
    pub report: ComparisonReport,
    pub profile: ProfileArtifacts,
    pub mlr_raw: MlrDetail,
    pub mlr_transformed: MlrDetail,
    pub tree: TreeDetail,
    pub forest: ForestDetail,
}

/// Overfit / multicollinearity / outlier flags from model outputs. Pure so
/// the flags can be re-derived from serialized reports.
pub fn derive_flags(
    training_pct: f64,
    validation_pct: f64,
    overfit_gap: f64,
    max_vif: Option<f64>,
    has_outlier: bool,
) -> (bool, bool, bool) {
    (
        training_pct - validation_pct > overfit_gap,
        max_vif.is_some_and(|v| v > VIF_FLAG_THRESHOLD),
        has_outlier,
    )
}

/// Indices with |standardized value| > 3, standardizing by the vector's own
/// mean and standard deviation (used for tree-model residuals).
pub fn standardized_outliers(errors: &[f64]) -> Vec<usize> {
    let n = errors.len() as f64;
    if errors.len() < 2 {
        return Vec::new();
    }
    let mean = errors.iter().sum::<f64>() / n;
    let sd = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Vec::new();
    }
    errors
        .iter()
        .enumerate()
        .filter(|(_, e)| ((*e - mean) / sd).abs() > 3.0)
        .map(|(i, _)| i)
        .collect()
}

pub fn load_input(cfg: &PipelineConfig) -> Result<Dataset> {
    match &cfg.input {
        InputSource::Path(path) => {
            load_csv(path).with_context(|| format!("loading {}", path.display()))
        }
        InputSource::Synthetic { rows } => Ok(generate_synthetic(
            *rows,
            child_seed(cfg.seed, stream::SYNTH),
            &GeneratorProfile::default(),
        )?),
    }
}

/// Predictor list: explicit from config, or every column except the response.
pub fn predictor_names(cfg: &PipelineConfig, ds: &Dataset) -> Result<Vec<String>> {
    if !ds.has_column(&cfg.response) {
        bail!("response column {:?} not in dataset", cfg.response);
    }
    if cfg.predictors.is_empty() {
        Ok(ds
            .names()
            .into_iter()
            .filter(|n| *n != cfg.response)
            .map(String::from)
            .collect())
    } else {
        for p in &cfg.predictors {
            if p == &cfg.response {
                bail!("response {:?} listed among predictors", p);
            }
            if !ds.has_column(p) {
                bail!("predictor column {p:?} not in dataset");
            }
        }
        Ok(cfg.predictors.clone())
    }
}

pub fn profile_dataset(
    ds: &Dataset,
    predictors: &[String],
    bins: usize,
) -> Result<ProfileArtifacts> {
    let mut summaries = Vec::new();
    let mut histograms = Vec::new();
    for (name, col) in ds.columns() {
        summaries.push((name.to_string(), summarize(col)?));
        histograms.push((name.to_string(), histogram(col, bins)?));
    }
    let correlation = correlation_matrix(ds, predictors)?;
    Ok(ProfileArtifacts {
        summaries,
        histograms,
        correlation,
    })
}

/// Decide and apply Box-Cox per column, producing the dataset the
/// transformed MLR model is fit on. Returns the new dataset, the applied
/// transforms, the candidate names, and the response name in the new table.
pub fn apply_transform_map(
    ds: &Dataset,
    predictors: &[String],
    response: &str,
    map: &TransformMap,
) -> Result<(Dataset, Vec<TransformRecord>, Vec<String>, String)> {
    let mut involved: Vec<String> = predictors.to_vec();
    involved.push(response.to_string());

    if let TransformMap::Columns(cols) = map {
        for c in cols {
            if !involved.contains(c) {
                bail!("transform-map column {c:?} is not the response or a predictor");
            }
        }
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut records: Vec<TransformRecord> = Vec::new();
    let mut candidates: Vec<String> = Vec::new();
    let mut response_name = response.to_string();

    for name in &involved {
        let col = ds.column(name)?;
        let wants = match map {
            TransformMap::Off => false,
            TransformMap::Auto => skewness(col).abs() > AUTO_SKEW_THRESHOLD,
            TransformMap::Columns(cols) => cols.contains(name),
        };
        let is_response = name == response;
        if wants {
            let params = boxcox_optimal_lambda(col)?;
            let t: TransformedColumn = boxcox_apply(col, params.lambda, params.shift, name)?;
            let new_name = format!("bc_{name}");
            records.push(TransformRecord {
                column: name.clone(),
                transformed_name: new_name.clone(),
                lambda: params.lambda,
                shift: params.shift,
                source_min: params.source_min,
            });
            columns.push((new_name.clone(), t.values));
            if is_response {
                response_name = new_name;
            } else {
                candidates.push(new_name);
            }
        } else {
            columns.push((name.clone(), col.to_vec()));
            if !is_response {
                candidates.push(name.clone());
            }
        }
    }

    Ok((Dataset::new(columns)?, records, candidates, response_name))
}

fn max_vif(fit: &OlsFit) -> Option<f64> {
    fit.vif
        .iter()
        .cloned()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

#[allow(clippy::too_many_arguments)]
fn fit_mlr_model(
    label: &str,
    ds: &Dataset,
    response: &str,
    candidates: &[String],
    cfg: &PipelineConfig,
    cv_seed: u64,
    transforms: Vec<TransformRecord>,
    response_record: Option<&TransformRecord>,
    raw_response: &[f64],
) -> Result<(MlrDetail, ModelRow)> {
    let mut sw_cfg = StepwiseConfig::new(candidates.to_vec());
    sw_cfg.alpha_enter = cfg.alpha_enter;
    sw_cfg.alpha_remove = cfg.alpha_remove;
    let (fit, trace) = stepwise_select(ds, response, &sw_cfg)?;

    let selected: Vec<String> = fit.predictor_names().to_vec();
    let cv: CvResult = kfold_cv(ds, response, &selected, cfg.cv_folds, cv_seed)?;
    let anova_table = if selected.is_empty() {
        None
    } else {
        Some(anova(&fit, &selected)?)
    };
    let diag = residual_diagnostics(&fit, None)?;

    let actual = ds.column(response)?.to_vec();
    let predicted = fit.fitted.clone();
    let eval_fitted = evaluate(&actual, &predicted)?;

    // When the response was transformed, also score on the original scale.
    // A fitted value can overshoot the transform's attainable range (no
    // preimage exists); the raw-scale numbers are then omitted.
    let eval_raw = match response_record {
        Some(rec) => {
            let col = TransformedColumn {
                values: predicted.clone(),
                params: regkit::transform::BoxCoxParams {
                    lambda: rec.lambda,
                    shift: rec.shift,
                    source_min: rec.source_min,
                },
                original_name: rec.column.clone(),
            };
            match boxcox_inverse(&col) {
                Ok(back) => Some(evaluate(raw_response, &back)?),
                Err(regkit::Error::InverseDomain { .. }) => None,
                Err(e) => return Err(e.into()),
            }
        }
        None => None,
    };

    let report = fit_report(label, &fit, Some(&cv), Some(trace), anova_table);
    let training = 100.0 * fit.r2;
    let validation = 100.0 * cv.cv_r2;
    let (overfit, multi, outlier) = derive_flags(
        training,
        validation,
        cfg.overfit_gap,
        max_vif(&fit),
        !diag.flagged_outliers.is_empty(),
    );
    let row = ModelRow {
        model: label.to_string(),
        training_accuracy_pct: training,
        validation_accuracy_pct: validation,
        correlation: eval_fitted.correlation,
        overfit_flag: overfit,
        multicollinearity_flag: multi,
        outlier_flag: outlier,
    };
    Ok((
        MlrDetail {
            report,
            diagnostics: diag,
            eval_fitted_scale: eval_fitted,
            eval_raw_scale: eval_raw,
            transforms,
            actual,
            predicted,
        },
        row,
    ))
}

fn dataset_features<'a>(
    ds: &'a Dataset,
    names: &'a [String],
) -> Result<Vec<(&'a str, &'a [f64])>> {
    names
        .iter()
        .map(|n| Ok((n.as_str(), ds.column(n)?)))
        .collect::<regkit::Result<_>>()
        .map_err(Into::into)
}

fn predict_rows(
    predict: impl Fn(&[f64]) -> regkit::Result<f64>,
    features: &[(&str, &[f64])],
    n: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut row = vec![0.0; features.len()];
    for i in 0..n {
        for (j, (_, col)) in features.iter().enumerate() {
            row[j] = col[i];
        }
        out.push(predict(&row)?);
    }
    Ok(out)
}

fn fit_tree_model(
    train: &Dataset,
    test: &Dataset,
    response: &str,
    predictors: &[String],
    cfg: &PipelineConfig,
) -> Result<(TreeDetail, ModelRow, RegressionTree)> {
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        min_samples_leaf: 1,
        seed: child_seed(cfg.seed, stream::TREE),
    };
    let train_feats = dataset_features(train, predictors)?;
    let train_y = train.column(response)?;
    let tree = tree_fit(&train_feats, train_y, &tree_cfg, None)?;

    let train_pred = predict_rows(|r| tree.predict(r), &train_feats, train.n_rows())?;
    let test_feats = dataset_features(test, predictors)?;
    let test_y = test.column(response)?;
    let test_pred = predict_rows(|r| tree.predict(r), &test_feats, test.n_rows())?;

    let train_eval = evaluate(train_y, &train_pred)?;
    let test_eval = evaluate(test_y, &test_pred)?;

    let errors: Vec<f64> = test_y.iter().zip(&test_pred).map(|(a, p)| a - p).collect();
    let (overfit, multi, outlier) = derive_flags(
        100.0 * train_eval.r2,
        100.0 * test_eval.r2,
        cfg.overfit_gap,
        None,
        !standardized_outliers(&errors).is_empty(),
    );
    let row = ModelRow {
        model: "DecisionTree".to_string(),
        training_accuracy_pct: 100.0 * train_eval.r2,
        validation_accuracy_pct: 100.0 * test_eval.r2,
        correlation: test_eval.correlation,
        overfit_flag: overfit,
        multicollinearity_flag: multi,
        outlier_flag: outlier,
    };
    Ok((
        TreeDetail {
            train_eval,
            test_eval,
            depth: tree.depth,
            leaf_count: tree.leaf_count,
            training_sse: tree.training_sse,
            test_actual: test_y.to_vec(),
            test_predicted: test_pred,
            model: tree.to_json(),
        },
        row,
        tree,
    ))
}

fn fit_forest_model(
    train: &Dataset,
    test: &Dataset,
    response: &str,
    predictors: &[String],
    cfg: &PipelineConfig,
) -> Result<(ForestDetail, ModelRow)> {
    let forest_cfg = ForestConfig {
        n_trees: cfg.trees,
        feature_subset: cfg.feature_subset,
        tree_cfg: TreeConfig {
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
            min_samples_leaf: 1,
            seed: 0,
        },
        bootstrap: true,
        seed: child_seed(cfg.seed, stream::FOREST),
    };
    let train_feats = dataset_features(train, predictors)?;
    let train_y = train.column(response)?;
    let forest = forest_fit(&train_feats, train_y, &forest_cfg)?;

    let train_pred = predict_rows(|r| forest.predict(r), &train_feats, train.n_rows())?;
    let test_feats = dataset_features(test, predictors)?;
    let test_y = test.column(response)?;
    let test_pred = predict_rows(|r| forest.predict(r), &test_feats, test.n_rows())?;

    let train_eval = evaluate(train_y, &train_pred)?;
    let test_eval = evaluate(test_y, &test_pred)?;
    let oob = oob_score(&forest, &train_feats, train_y)?;
    let importance = feature_importance(&forest);

    let errors: Vec<f64> = test_y.iter().zip(&test_pred).map(|(a, p)| a - p).collect();
    let (overfit, multi, outlier) = derive_flags(
        100.0 * train_eval.r2,
        100.0 * test_eval.r2,
        cfg.overfit_gap,
        None,
        !standardized_outliers(&errors).is_empty(),
    );
    let row = ModelRow {
        model: "RFR".to_string(),
        training_accuracy_pct: 100.0 * train_eval.r2,
        validation_accuracy_pct: 100.0 * test_eval.r2,
        correlation: test_eval.correlation,
        overfit_flag: overfit,
        multicollinearity_flag: multi,
        outlier_flag: outlier,
    };
    Ok((
        ForestDetail {
            n_trees: cfg.trees,
            feature_subset: format!("{:?}", cfg.feature_subset),
            train_eval,
            test_eval,
            oob,
            importance,
            test_actual: test_y.to_vec(),
            test_predicted: test_pred,
        },
        row,
    ))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn predicted_vs_actual_csv(actual: &[f64], predicted: &[f64]) -> String {
    let mut out = String::from("actual,predicted\n");
    for (a, p) in actual.iter().zip(predicted) {
        out.push_str(&format!("{a},{p}\n"));
    }
    out
}

/// Plot-data files: predicted-vs-actual per model, the transformed-model
/// residual series (sorted by residual so the theoretical quantiles
/// increase), and the forest importances.
pub fn emit_plot_data(artifacts: &PipelineArtifacts, dir: &Path) -> Result<()> {
    write_text(
        dir,
        "predicted_vs_actual_mlr_raw.csv",
        &predicted_vs_actual_csv(&artifacts.mlr_raw.actual, &artifacts.mlr_raw.predicted),
    )?;
    write_text(
        dir,
        "predicted_vs_actual_mlr_transformed.csv",
        &predicted_vs_actual_csv(
            &artifacts.mlr_transformed.actual,
            &artifacts.mlr_transformed.predicted,
        ),
    )?;
    write_text(
        dir,
        "predicted_vs_actual_tree.csv",
        &predicted_vs_actual_csv(&artifacts.tree.test_actual, &artifacts.tree.test_predicted),
    )?;
    write_text(
        dir,
        "predicted_vs_actual_forest.csv",
        &predicted_vs_actual_csv(
            &artifacts.forest.test_actual,
            &artifacts.forest.test_predicted,
        ),
    )?;

    // Rows sorted by residual; `order` is the original observation index.
    let detail = &artifacts.mlr_transformed;
    let mut rows: Vec<(usize, f64, f64)> = detail
        .actual
        .iter()
        .zip(&detail.predicted)
        .enumerate()
        .map(|(i, (a, p))| (i, *p, a - p))
        .collect();
    rows.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let mut csv = String::from("order,fitted,residual,theoretical_quantile\n");
    for ((order, fitted, residual), (q, _)) in
        rows.iter().zip(&detail.diagnostics.normal_plot_points)
    {
        csv.push_str(&format!("{order},{fitted},{residual},{q}\n"));
    }
    write_text(dir, "residuals_mlr2.csv", &csv)?;

    let mut csv = String::from("feature,importance\n");
    for (name, value) in &artifacts.forest.importance.items {
        csv.push_str(&format!("{name},{value}\n"));
    }
    write_text(dir, "importance_rfr.csv", &csv)?;
    Ok(())
}

fn forest_markdown(detail: &ForestDetail) -> String {
    let mut out = String::from("## Random forest\n\n");
    out.push_str(&format!(
        "{} trees, feature subset {}.\n\n",
        detail.n_trees, detail.feature_subset
    ));
    out.push_str("| Sample | R-sq | RMSE | MAPE | Correlation |\n");
    out.push_str("|--------|------|------|------|-------------|\n");
    for (label, e) in [("Training", &detail.train_eval), ("Testing", &detail.test_eval)] {
        out.push_str(&format!(
            "| {label} | {:.2}% | {:.3e} | {:.2}% | {:.2} |\n",
            100.0 * e.r2,
            e.rmse,
            e.mape_pct,
            e.correlation
        ));
    }
    out.push_str(&format!(
        "\nOut-of-bag: R-sq {:.2}%, RMSE {:.3e} over {} covered rows.\n",
        100.0 * detail.oob.oob_r2,
        detail.oob.oob_rmse,
        detail.oob.covered_rows
    ));
    out.push_str("\n### Variable importance\n\n| Feature | Importance |\n|---------|------------|\n");
    for (name, value) in &detail.importance.items {
        out.push_str(&format!("| {name} | {:.1}% |\n", 100.0 * value));
    }
    out
}

fn comparison_markdown(report: &ComparisonReport) -> String {
    let mut out = String::from("# Performance comparison\n\n");
    out.push_str(
        "| Model | Training Accuracy | K-fold/Testing Accuracy | Correlation Coefficient | Model Overfit | Multicollinearity Problem | Outlier Problem |\n",
    );
    out.push_str("|-------|-------------------|-------------------------|-------------------------|---------------|---------------------------|-----------------|\n");
    for row in &report.rows {
        let yes_no = |b: bool| if b { "Yes" } else { "No" };
        out.push_str(&format!(
            "| {} | {:.2}% | {:.2}% | {:.2} | {} | {} | {} |\n",
            row.model,
            row.training_accuracy_pct,
            row.validation_accuracy_pct,
            row.correlation,
            yes_no(row.overfit_flag),
            yes_no(row.multicollinearity_flag),
            yes_no(row.outlier_flag),
        ));
    }
    out.push_str(
        "\nValidation accuracy is 10-fold CV R-sq for the MLR rows and held-out test R-sq for the tree rows. MLR accuracies are on each model's own fitting scale (the transformed model reports the transformed scale; see mlr_transformed.json for raw-scale metrics).\n",
    );
    out
}

/// Run the full pipeline and write every artifact under the output dir.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineArtifacts> {
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let dir = cfg.output_dir.clone();

    let ds = load_input(cfg).context("stage input")?;
    if let InputSource::Synthetic { .. } = cfg.input {
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).context("stage input")?;
        fs::write(dir.join("synthetic.csv"), buf).context("stage input")?;
    }
    let predictors = predictor_names(cfg, &ds).context("stage input")?;

    // Profiling artifacts.
    let profile =
        profile_dataset(&ds, &predictors, cfg.histogram_bins).context("stage profile")?;
    write_json(&dir, "summaries.json", &profile.summaries)?;
    write_json(&dir, "histograms.json", &profile.histograms)?;
    write_json(&dir, "correlation.json", &profile.correlation)?;

    // MLR 1: raw data.
    let raw_y = ds.column(&cfg.response)?.to_vec();
    let (mlr_raw, row_raw) = fit_mlr_model(
        "MLR-raw",
        &ds,
        &cfg.response,
        &predictors,
        cfg,
        child_seed(cfg.seed, stream::CV_RAW),
        Vec::new(),
        None,
        &raw_y,
    )
    .context("stage mlr-raw")?;
    write_json(&dir, "mlr_raw.json", &mlr_raw)?;
    write_text(&dir, "mlr_raw.md", &mlr_raw.report.to_markdown())?;

    // MLR 2: Box-Cox transformed data.
    let (tds, records, candidates, t_response) =
        apply_transform_map(&ds, &predictors, &cfg.response, &cfg.transform_map)
            .context("stage transform")?;
    write_json(&dir, "boxcox_params.json", &records)?;
    let response_record = records.iter().find(|r| r.column == cfg.response).cloned();
    let (mlr_t, row_t) = fit_mlr_model(
        "MLR-transformed-stepwise",
        &tds,
        &t_response,
        &candidates,
        cfg,
        child_seed(cfg.seed, stream::CV_TRANSFORMED),
        records.clone(),
        response_record.as_ref(),
        &raw_y,
    )
    .context("stage mlr-transformed")?;
    write_json(&dir, "mlr_transformed.json", &mlr_t)?;
    write_text(&dir, "mlr_transformed.md", &mlr_t.report.to_markdown())?;

    // Tree models share one raw-data 80/20 split.
    let split = SplitSpec {
        test_fraction: cfg.test_fraction,
        seed: child_seed(cfg.seed, stream::SPLIT),
    };
    let (train, test) = train_test_split(&ds, &split).context("stage split")?;

    let (tree_detail, row_tree, _) =
        fit_tree_model(&train, &test, &cfg.response, &predictors, cfg)
            .context("stage tree")?;
    write_json(&dir, "tree.json", &tree_detail)?;

    let (forest_detail, row_forest) =
        fit_forest_model(&train, &test, &cfg.response, &predictors, cfg)
            .context("stage forest")?;
    write_json(&dir, "forest.json", &forest_detail)?;
    write_text(&dir, "forest.md", &forest_markdown(&forest_detail))?;

    let report = ComparisonReport {
        rows: vec![row_raw, row_t, row_tree, row_forest],
    };
    write_json(&dir, "comparison.json", &report)?;
    write_text(&dir, "comparison.md", &comparison_markdown(&report))?;

    let artifacts = PipelineArtifacts {
        report,
        profile,
        mlr_raw,
        mlr_transformed: mlr_t,
        tree: tree_detail,
        forest: forest_detail,
    };
    emit_plot_data(&artifacts, &dir).context("stage plot-data")?;
    Ok(artifacts)
}

/// Run profiling only (the `profile` subcommand).
pub fn run_profile(cfg: &PipelineConfig) -> Result<ProfileArtifacts> {
    fs::create_dir_all(&cfg.output_dir)?;
    let ds = load_input(cfg)?;
    let predictors = predictor_names(cfg, &ds)?;
    let profile = profile_dataset(&ds, &predictors, cfg.histogram_bins)?;
    write_json(&cfg.output_dir, "summaries.json", &profile.summaries)?;
    write_json(&cfg.output_dir, "histograms.json", &profile.histograms)?;
    write_json(&cfg.output_dir, "correlation.json", &profile.correlation)?;

    let mut md = String::from("# Dataset profile\n\n| Column | n | mean | std_dev | min | median | max | skewness |\n|---|---|---|---|---|---|---|---|\n");
    for (name, s) in &profile.summaries {
        md.push_str(&format!(
            "| {} | {} | {:.6e} | {:.6e} | {:.6e} | {:.6e} | {:.6e} | {:.3} |\n",
            name, s.n, s.mean, s.std_dev, s.min, s.median, s.max, s.skewness
        ));
    }
    write_text(&cfg.output_dir, "profile.md", &md)?;
    Ok(profile)
}

/// Write the synthetic dataset (the `synth` subcommand).
pub fn run_synth(cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    let rows = match cfg.input {
        InputSource::Synthetic { rows } => rows,
        _ => 124,
    };
    let ds = generate_synthetic(
        rows,
        child_seed(cfg.seed, stream::SYNTH),
        &GeneratorProfile::default(),
    )?;
    let mut buf = Vec::new();
    ds.write_csv(&mut buf)?;
    fs::write(cfg.output_dir.join("synthetic.csv"), buf)?;
    Ok(())
}

/// Transform columns per the map and write the transformed table plus the
/// parameters needed to invert it (the `transform` subcommand).
pub fn run_transform(cfg: &PipelineConfig) -> Result<Vec<TransformRecord>> {
    fs::create_dir_all(&cfg.output_dir)?;
    let ds = load_input(cfg)?;
    let predictors = predictor_names(cfg, &ds)?;
    let (tds, records, _, _) =
        apply_transform_map(&ds, &predictors, &cfg.response, &cfg.transform_map)?;
    let mut buf = Vec::new();
    tds.write_csv(&mut buf)?;
    fs::write(cfg.output_dir.join("transformed.csv"), buf)?;
    write_json(&cfg.output_dir, "boxcox_params.json", &records)?;
    Ok(records)
}

/// Fit one MLR (with optional transform map) and write its reports
/// (the `fit-mlr` subcommand).
pub fn run_fit_mlr(cfg: &PipelineConfig) -> Result<MlrDetail> {
    fs::create_dir_all(&cfg.output_dir)?;
    let ds = load_input(cfg)?;
    let predictors = predictor_names(cfg, &ds)?;
    let raw_y = ds.column(&cfg.response)?.to_vec();
    let (tds, records, candidates, t_response) =
        apply_transform_map(&ds, &predictors, &cfg.response, &cfg.transform_map)?;
    let response_record = records.iter().find(|r| r.column == cfg.response).cloned();
    let label = if records.is_empty() {
        "MLR"
    } else {
        "MLR (Box-Cox transformed)"
    };
    let (detail, _) = fit_mlr_model(
        label,
        &tds,
        &t_response,
        &candidates,
        cfg,
        child_seed(cfg.seed, stream::CV_RAW),
        records,
        response_record.as_ref(),
        &raw_y,
    )?;
    write_json(&cfg.output_dir, "mlr.json", &detail)?;
    write_text(&cfg.output_dir, "mlr.md", &detail.report.to_markdown())?;
    Ok(detail)
}

/// Fit the single decision tree and write its reports (the `fit-tree`
/// subcommand).
pub fn run_fit_tree(cfg: &PipelineConfig) -> Result<TreeDetail> {
    fs::create_dir_all(&cfg.output_dir)?;
    let ds = load_input(cfg)?;
    let predictors = predictor_names(cfg, &ds)?;
    let split = SplitSpec {
        test_fraction: cfg.test_fraction,
        seed: child_seed(cfg.seed, stream::SPLIT),
    };
    let (train, test) = train_test_split(&ds, &split)?;
    let (detail, _, _) = fit_tree_model(&train, &test, &cfg.response, &predictors, cfg)?;
    write_json(&cfg.output_dir, "tree.json", &detail)?;
    write_text(
        &cfg.output_dir,
        "predicted_vs_actual_tree.csv",
        &predicted_vs_actual_csv(&detail.test_actual, &detail.test_predicted),
    )?;
    Ok(detail)
}

/// Fit the random forest, write reports plus the full model serialization
/// (the `fit-forest` subcommand).
pub fn run_fit_forest(cfg: &PipelineConfig) -> Result<ForestDetail> {
    fs::create_dir_all(&cfg.output_dir)?;
    let ds = load_input(cfg)?;
    let predictors = predictor_names(cfg, &ds)?;
    let split = SplitSpec {
        test_fraction: cfg.test_fraction,
        seed: child_seed(cfg.seed, stream::SPLIT),
    };
    let (train, test) = train_test_split(&ds, &split)?;

    // Refit here to also capture the serialized model.
    let forest_cfg = ForestConfig {
        n_trees: cfg.trees,
        feature_subset: cfg.feature_subset,
        tree_cfg: TreeConfig {
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
            min_samples_leaf: 1,
            seed: 0,
        },
        bootstrap: true,
        seed: child_seed(cfg.seed, stream::FOREST),
    };
    let train_feats = dataset_features(&train, &predictors)?;
    let train_y = train.column(&cfg.response)?;
    let forest = forest_fit(&train_feats, train_y, &forest_cfg)?;
    fs::write(
        cfg.output_dir.join("forest_model.json"),
        serde_json::to_string(&forest.to_json())? + "\n",
    )?;

    let (detail, _) = fit_forest_model(&train, &test, &cfg.response, &predictors, cfg)?;
    write_json(&cfg.output_dir, "forest.json", &detail)?;
    write_text(&cfg.output_dir, "forest.md", &forest_markdown(&detail))?;
    write_text(
        &cfg.output_dir,
        "predicted_vs_actual_forest.csv",
        &predicted_vs_actual_csv(&detail.test_actual, &detail.test_predicted),
    )?;
    let mut csv = String::from("feature,importance\n");
    for (name, value) in &detail.importance.items {
        csv.push_str(&format!("{name},{value}\n"));
    }
    write_text(&cfg.output_dir, "importance_rfr.csv", &csv)?;
    Ok(detail)
}
