//! Pipeline configuration: defaults, a flat config file, and CLI overrides.
//!
//! Every config-file key has a CLI flag of the same name (dashes in flags,
//! underscores in the file); explicit flags win over the file, the file wins
//! over defaults.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use regkit::forest::FeatureSubset;

/// Where the pipeline's rows come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InputSource {
    /// Load a CSV file.
    Path(PathBuf),
    /// Generate the synthetic dataset with the default profile.
    Synthetic { rows: usize },
}

/// Per-column Box-Cox policy for the transformed MLR model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TransformMap {
    /// Transform the columns whose |skewness| exceeds 0.80.
    Auto,
    /// No transformation (the transformed model degenerates to the raw one).
    Off,
    /// Transform exactly these columns.
    Columns(Vec<String>),
}

impl TransformMap {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(TransformMap::Auto),
            "off" => Ok(TransformMap::Off),
            list => {
                let cols: Vec<String> = list
                    .split(',')
                    .map(|c| c.trim().to_string())
                    .filter(|c| !c.is_empty())
                    .collect();
                if cols.is_empty() {
                    bail!("transform-map must be 'auto', 'off' or a comma-separated column list");
                }
                Ok(TransformMap::Columns(cols))
            }
        }
    }
}

pub fn parse_feature_subset(s: &str) -> Result<FeatureSubset> {
    match s {
        "sqrt" => Ok(FeatureSubset::Sqrt),
        "all" => Ok(FeatureSubset::All),
        k => {
            let count: usize = k
                .parse()
                .with_context(|| format!("feature-subset must be 'sqrt', 'all' or a count, got {k:?}"))?;
            Ok(FeatureSubset::Count(count))
        }
    }
}

/// Fully resolved pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub seed: u64,
    pub response: String,
    /// Empty means "every column except the response".
    pub predictors: Vec<String>,
    pub transform_map: TransformMap,
    pub alpha_enter: f64,
    pub alpha_remove: f64,
    pub cv_folds: usize,
    pub test_fraction: f64,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub trees: usize,
    pub feature_subset: FeatureSubset,
    /// Train-minus-validation gap (percentage points) that flags overfit.
    pub overfit_gap: f64,
    pub histogram_bins: usize,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: InputSource::Synthetic { rows: 124 },
            seed: 0,
            response: String::new(),
            predictors: Vec::new(),
            transform_map: TransformMap::Auto,
            alpha_enter: 0.15,
            alpha_remove: 0.15,
            cv_folds: 10,
            test_fraction: 0.2,
            max_depth: None,
            min_samples_split: 2,
            trees: 100,
            feature_subset: FeatureSubset::All,
            overfit_gap: 3.0,
            histogram_bins: 10,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// The flat config file. Keys mirror the CLI flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<String>,
    pub seed: Option<u64>,
    pub response: Option<String>,
    pub predictors: Option<String>,
    pub out: Option<String>,
    pub folds: Option<usize>,
    pub test_fraction: Option<f64>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub alpha_enter: Option<f64>,
    pub alpha_remove: Option<f64>,
    pub feature_subset: Option<String>,
    pub overfit_gap: Option<f64>,
    pub transform_map: Option<String>,
    pub rows: Option<usize>,
    pub bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// CLI-provided overrides; `None` means the flag was not given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<String>,
    pub seed: Option<u64>,
    pub response: Option<String>,
    pub predictors: Option<String>,
    pub out: Option<String>,
    pub folds: Option<usize>,
    pub test_fraction: Option<f64>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub alpha_enter: Option<f64>,
    pub alpha_remove: Option<f64>,
    pub feature_subset: Option<String>,
    pub overfit_gap: Option<f64>,
    pub transform_map: Option<String>,
    pub rows: Option<usize>,
    pub bins: Option<usize>,
}

fn pick<T>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

/// Merge CLI flags over the config file over the defaults.
pub fn resolve(file: FileConfig, cli: Overrides) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();

    let rows = pick(cli.rows, file.rows).unwrap_or(124);
    cfg.input = match pick(cli.input, file.input) {
        None => InputSource::Synthetic { rows },
        Some(s) if s == "synthetic" => InputSource::Synthetic { rows },
        Some(path) => InputSource::Path(PathBuf::from(path)),
    };
    if let Some(seed) = pick(cli.seed, file.seed) {
        cfg.seed = seed;
    }
    if let Some(resp) = pick(cli.response, file.response) {
        cfg.response = resp;
    }
    if let Some(preds) = pick(cli.predictors, file.predictors) {
        cfg.predictors = preds
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
    }
    if let Some(out) = pick(cli.out, file.out) {
        cfg.output_dir = PathBuf::from(out);
    }
    if let Some(folds) = pick(cli.folds, file.folds) {
        cfg.cv_folds = folds;
    }
    if let Some(f) = pick(cli.test_fraction, file.test_fraction) {
        cfg.test_fraction = f;
    }
    if let Some(trees) = pick(cli.trees, file.trees) {
        cfg.trees = trees;
    }
    cfg.max_depth = pick(cli.max_depth, file.max_depth);
    if let Some(mss) = pick(cli.min_samples_split, file.min_samples_split) {
        cfg.min_samples_split = mss;
    }
    if let Some(a) = pick(cli.alpha_enter, file.alpha_enter) {
        cfg.alpha_enter = a;
    }
    if let Some(a) = pick(cli.alpha_remove, file.alpha_remove) {
        cfg.alpha_remove = a;
    }
    if let Some(fs) = pick(cli.feature_subset, file.feature_subset) {
        cfg.feature_subset = parse_feature_subset(&fs)?;
    }
    if let Some(g) = pick(cli.overfit_gap, file.overfit_gap) {
        cfg.overfit_gap = g;
    }
    if let Some(tm) = pick(cli.transform_map, file.transform_map) {
        cfg.transform_map = TransformMap::parse(&tm)?;
    }
    if let Some(bins) = pick(cli.bins, file.bins) {
        cfg.histogram_bins = bins;
    }

    // The synthetic table has a canonical response.
    if cfg.response.is_empty() {
        match &cfg.input {
            InputSource::Synthetic { .. } => cfg.response = "d80".to_string(),
            InputSource::Path(p) => {
                bail!("--response is required for CSV input {}", p.display())
            }
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_for_synthetic() {
        let cfg = resolve(FileConfig::default(), Overrides::default()).unwrap();
        assert_eq!(cfg.response, "d80");
        assert_eq!(cfg.cv_folds, 10);
        assert_eq!(cfg.trees, 100);
        assert!(matches!(cfg.input, InputSource::Synthetic { rows: 124 }));
    }

    #[test]
    fn cli_beats_file() {
        let file = FileConfig {
            seed: Some(3),
            folds: Some(5),
            ..FileConfig::default()
        };
        let cli = Overrides {
            seed: Some(9),
            ..Overrides::default()
        };
        let cfg = resolve(file, cli).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.cv_folds, 5);
    }

    #[test]
    fn csv_requires_response() {
        let cli = Overrides {
            input: Some("data.csv".to_string()),
            ..Overrides::default()
        };
        assert!(resolve(FileConfig::default(), cli).is_err());
    }

    #[test]
    fn transform_map_parses() {
        assert_eq!(TransformMap::parse("auto").unwrap(), TransformMap::Auto);
        assert_eq!(TransformMap::parse("off").unwrap(), TransformMap::Off);
        assert_eq!(
            TransformMap::parse("d98, d97").unwrap(),
            TransformMap::Columns(vec!["d98".into(), "d97".into()])
        );
    }
}
