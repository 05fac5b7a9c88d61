use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use regkit_cli::config::{resolve, FileConfig, Overrides};
use regkit_cli::pipeline;

#[derive(Parser)]
#[command(
    name = "regkit",
    version,
    about = "Regression toolkit: profile tabular data, fit linear and tree-based models, and compare them",
    after_help = "Typical runs:\n  regkit synth --seed 1 --out out\n  regkit profile --input out/synthetic.csv --response d80 --out out\n  regkit compare --seed 7 --out out\n  regkit compare --input data.csv --response d80 --predictors d99,d98,d97 --out out"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared flags; every one of these can also be set in a flat TOML config
/// file (same names, underscores for dashes) passed with --config.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat TOML config file; explicit flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV path, or "synthetic" for the built-in generator
    #[arg(long)]
    input: Option<String>,

    /// Master seed; all stage seeds derive from it
    #[arg(long)]
    seed: Option<u64>,

    /// Response column (defaults to d80 for synthetic input)
    #[arg(long)]
    response: Option<String>,

    /// Comma-separated predictor columns (default: all but the response)
    #[arg(long)]
    predictors: Option<String>,

    /// Output directory for all artifacts
    #[arg(long)]
    out: Option<String>,

    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,

    /// Held-out test fraction for the tree models
    #[arg(long)]
    test_fraction: Option<f64>,

    /// Number of trees in the forest
    #[arg(long)]
    trees: Option<usize>,

    /// Maximum tree depth (unlimited when omitted)
    #[arg(long)]
    max_depth: Option<usize>,

    /// Minimum samples required to split a node
    #[arg(long)]
    min_samples_split: Option<usize>,

    /// Stepwise entry threshold
    #[arg(long)]
    alpha_enter: Option<f64>,

    /// Stepwise removal threshold
    #[arg(long)]
    alpha_remove: Option<f64>,

    /// Per-node feature subsetting: sqrt | all | <count>
    #[arg(long)]
    feature_subset: Option<String>,

    /// Train-minus-validation gap (percentage points) that flags overfit
    #[arg(long)]
    overfit_gap: Option<f64>,

    /// Box-Cox policy: auto | off | comma-separated columns
    #[arg(long)]
    transform_map: Option<String>,

    /// Synthetic dataset rows
    #[arg(long)]
    rows: Option<usize>,

    /// Histogram bins for profiling
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic dataset as CSV
    Synth(Common),
    /// Summaries, histograms and the correlation matrix
    Profile(Common),
    /// Box-Cox transform columns and write the transformed table
    Transform(Common),
    /// Stepwise multiple linear regression with k-fold CV
    FitMlr(Common),
    /// CART regression tree on an 80/20 split
    FitTree(Common),
    /// Random forest with OOB validation and feature importance
    FitForest(Common),
    /// The full four-model comparison pipeline
    Compare(Common),
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        input: c.input.clone(),
        seed: c.seed,
        response: c.response.clone(),
        predictors: c.predictors.clone(),
        out: c.out.clone(),
        folds: c.folds,
        test_fraction: c.test_fraction,
        trees: c.trees,
        max_depth: c.max_depth,
        min_samples_split: c.min_samples_split,
        alpha_enter: c.alpha_enter,
        alpha_remove: c.alpha_remove,
        feature_subset: c.feature_subset.clone(),
        overfit_gap: c.overfit_gap,
        transform_map: c.transform_map.clone(),
        rows: c.rows,
        bins: c.bins,
    }
}

fn run(
    common: &Common,
    go: impl FnOnce(&regkit_cli::config::PipelineConfig) -> Result<()>,
) -> Result<()> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = resolve(file, overrides(common))?;
    go(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(c) => run(c, pipeline::run_synth),
        Command::Profile(c) => run(c, |cfg| pipeline::run_profile(cfg).map(|_| ())),
        Command::Transform(c) => run(c, |cfg| pipeline::run_transform(cfg).map(|_| ())),
        Command::FitMlr(c) => run(c, |cfg| pipeline::run_fit_mlr(cfg).map(|_| ())),
        Command::FitTree(c) => run(c, |cfg| pipeline::run_fit_tree(cfg).map(|_| ())),
        Command::FitForest(c) => run(c, |cfg| pipeline::run_fit_forest(cfg).map(|_| ())),
        Command::Compare(c) => run(c, |cfg| {
            let artifacts = pipeline::run_pipeline(cfg)?;
            for row in &artifacts.report.rows {
                println!(
                    "{:<26} train {:6.2}%  validation {:6.2}%  corr {:.2}",
                    row.model,
                    row.training_accuracy_pct,
                    row.validation_accuracy_pct,
                    row.correlation
                );
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
