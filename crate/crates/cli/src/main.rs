//! Command-line harness for the diabml pipeline.
//!
//! Subcommands: `validate` (load + clean audit), `run` (one experiment),
//! `compare` (the four SMOTE/selection ablation variants over a shared
//! split), `select` (feature selection only), `predict` (score one CSV row
//! against a saved model) and `synth` (write a synthetic dataset).
//!
//! Every pipeline flag may instead come from a `key: value` config file
//! (`--config`); explicit flags override file entries.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use diabml::bwo::FeatureSubset;
use diabml::classifiers::load_model;
use diabml::dataio::{self, ScalerParams};
use diabml::pipeline::{self, PipelineConfig, RunReport, Variant};

#[derive(Parser)]
#[command(
    name = "diabml",
    version,
    about = "Imbalanced diabetes-risk classification: BWO feature selection, \
             SMOTE balancing, eight classifiers and a full metric suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and clean a dataset, printing the audit report
    Validate(PipelineOpts),
    /// Run one experiment and write its reports
    Run(PipelineOpts),
    /// Run the four ablation variants (baseline, +SMOTE, +FS, +SMOTE+FS)
    Compare(PipelineOpts),
    /// Run feature selection only, printing the subset and trace
    Select(PipelineOpts),
    /// Score one sample row against a saved model
    Predict(PredictOpts),
    /// Write a synthetic dataset with a known informative feature set
    Synth(SynthOpts),
}

/// Flags mirror the config-file keys one for one; see the library's
/// `parse_key_values` for the file format.
#[derive(Args, Clone, Default)]
struct PipelineOpts {
    /// Flat key:value config file; flags below override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labeled CSV dataset
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Master seed; every stage seed is derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scaler fitting: "train" (leakage-safe) or "all" (fit before split)
    #[arg(long)]
    normalize: Option<String>,
    /// "all" or a list like "nb,lr,dt,knn,rf,svm,mlp,ada"
    #[arg(long)]
    classifiers: Option<String>,
    /// Write `model_<kind>.txt` files usable by `predict` (on/off)
    #[arg(long)]
    save_models: Option<String>,
    /// Imbalance handling toggle (on/off)
    #[arg(long)]
    smote: Option<String>,
    #[arg(long)]
    smote_k: Option<usize>,
    #[arg(long)]
    smote_ratio: Option<f64>,
    /// Feature-selection toggle (on/off)
    #[arg(long)]
    fs: Option<String>,
    /// Number of features to select
    #[arg(long)]
    fs_n: Option<usize>,
    #[arg(long)]
    fs_population: Option<usize>,
    #[arg(long)]
    fs_iterations: Option<usize>,
    #[arg(long)]
    fs_procreation: Option<f64>,
    #[arg(long)]
    fs_cannibalism: Option<f64>,
    #[arg(long)]
    fs_mutation: Option<f64>,
    #[arg(long)]
    fs_pairs: Option<usize>,
    /// Early-stop patience in iterations, or "off"
    #[arg(long)]
    fs_patience: Option<String>,
    #[arg(long)]
    fs_holdout: Option<f64>,
    /// Fitness subsample cap, or "none"
    #[arg(long)]
    fs_cap: Option<String>,
    /// Fitness surrogate classifier kind
    #[arg(long)]
    fs_surrogate: Option<String>,
    #[arg(long)]
    nb_var_floor: Option<f64>,
    #[arg(long)]
    lr_rate: Option<f64>,
    #[arg(long)]
    lr_epochs: Option<usize>,
    #[arg(long)]
    tree_depth: Option<usize>,
    #[arg(long)]
    tree_min_split: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    /// KNN stored-reference cap, or "none" for the full training set
    #[arg(long)]
    knn_cap: Option<String>,
    #[arg(long)]
    rf_trees: Option<usize>,
    #[arg(long)]
    rf_depth: Option<usize>,
    #[arg(long)]
    svm_lambda: Option<f64>,
    #[arg(long)]
    svm_epochs: Option<usize>,
    #[arg(long)]
    mlp_hidden: Option<usize>,
    #[arg(long)]
    mlp_rate: Option<f64>,
    #[arg(long)]
    mlp_epochs: Option<usize>,
    #[arg(long)]
    ada_rounds: Option<usize>,
}

impl PipelineOpts {
    /// Key/value pairs for every explicitly given flag, in the same
    /// vocabulary as the config file.
    fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                pairs.push((key.to_string(), v));
            }
        };
        push("data", self.data.as_ref().map(|p| p.display().to_string()));
        push("label-column", self.label_column.clone());
        push("test-fraction", self.test_fraction.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("normalize", self.normalize.clone());
        push("classifiers", self.classifiers.clone());
        push("save-models", self.save_models.clone());
        push("smote", self.smote.clone());
        push("smote-k", self.smote_k.map(|v| v.to_string()));
        push("smote-ratio", self.smote_ratio.map(|v| v.to_string()));
        push("fs", self.fs.clone());
        push("fs-n", self.fs_n.map(|v| v.to_string()));
        push("fs-population", self.fs_population.map(|v| v.to_string()));
        push("fs-iterations", self.fs_iterations.map(|v| v.to_string()));
        push("fs-procreation", self.fs_procreation.map(|v| v.to_string()));
        push("fs-cannibalism", self.fs_cannibalism.map(|v| v.to_string()));
        push("fs-mutation", self.fs_mutation.map(|v| v.to_string()));
        push("fs-pairs", self.fs_pairs.map(|v| v.to_string()));
        push("fs-patience", self.fs_patience.clone());
        push("fs-holdout", self.fs_holdout.map(|v| v.to_string()));
        push("fs-cap", self.fs_cap.clone());
        push("fs-surrogate", self.fs_surrogate.clone());
        push("nb-var-floor", self.nb_var_floor.map(|v| v.to_string()));
        push("lr-rate", self.lr_rate.map(|v| v.to_string()));
        push("lr-epochs", self.lr_epochs.map(|v| v.to_string()));
        push("tree-depth", self.tree_depth.map(|v| v.to_string()));
        push("tree-min-split", self.tree_min_split.map(|v| v.to_string()));
        push("knn-k", self.knn_k.map(|v| v.to_string()));
        push("knn-cap", self.knn_cap.clone());
        push("rf-trees", self.rf_trees.map(|v| v.to_string()));
        push("rf-depth", self.rf_depth.map(|v| v.to_string()));
        push("svm-lambda", self.svm_lambda.map(|v| v.to_string()));
        push("svm-epochs", self.svm_epochs.map(|v| v.to_string()));
        push("mlp-hidden", self.mlp_hidden.map(|v| v.to_string()));
        push("mlp-rate", self.mlp_rate.map(|v| v.to_string()));
        push("mlp-epochs", self.mlp_epochs.map(|v| v.to_string()));
        push("ada-rounds", self.ada_rounds.map(|v| v.to_string()));
        pairs
    }

    fn build_config(&self) -> anyhow::Result<PipelineConfig> {
        let mut config = PipelineConfig::new("");
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            let pairs = pipeline::parse_key_values(&text)?;
            config.apply_key_values(&pairs)?;
        }
        config.apply_key_values(&self.to_pairs())?;
        if config.data_path.as_os_str().is_empty() {
            bail!("no dataset given: pass --data or a config file with a data: entry");
        }
        Ok(config)
    }
}

#[derive(Args)]
struct PredictOpts {
    /// Model file written by `run --save-models on`
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated feature values, full width before selection/scaling
    #[arg(long)]
    row: String,
    /// scaler.csv from the run that trained the model; applies MinMax
    #[arg(long)]
    scaler: Option<PathBuf>,
    /// selected_features.txt from that run; restricts the row to the
    /// model's columns (one-based indices)
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args)]
struct SynthOpts {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    rows: usize,
    /// One-based informative feature indices, e.g. "1;2;3;4;5;6;7;8;9"
    #[arg(long, default_value = "1;2;3;4;5;6;7;8;9")]
    informative: String,
    #[arg(long, default_value_t = 12)]
    noise: usize,
    #[arg(long, default_value_t = 0.05)]
    flip: f64,
    /// Positive-class prevalence in (0,1]
    #[arg(long, default_value_t = 0.5)]
    imbalance: f64,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    // Exit quietly when stdout closes early (e.g. piped into `head`),
    // matching standard utility behavior instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate(opts) => validate(&opts),
        Command::Run(opts) => run_one(&opts),
        Command::Compare(opts) => compare(&opts),
        Command::Select(opts) => select(&opts),
        Command::Predict(opts) => predict(&opts),
        Command::Synth(opts) => synth(&opts),
    }
}

fn validate(opts: &PipelineOpts) -> anyhow::Result<()> {
    let config = opts.build_config()?;
    let raw: diabml::Dataset64 = dataio::load_csv(&config.data_path, &config.label_column)?;
    println!(
        "loaded {} rows x {} features from {}",
        raw.n_rows(),
        raw.n_features(),
        config.data_path.display()
    );
    let (cleaned, report) = dataio::clean(&raw)?;
    let (neg, pos) = cleaned.class_counts();
    print!("{}", report.to_text());
    println!("class 0: {neg}\nclass 1: {pos}");
    Ok(())
}

fn print_classifier_table(report: &RunReport<f64>) {
    println!(
        "{:<20} {:>9} {:>11} {:>11} {:>10} {:>8} {:>8} {:>8}",
        "classifier", "accuracy", "sensitivity", "specificity", "precision", "f1", "mcc", "auc"
    );
    for c in &report.classifiers {
        let m = &c.metrics;
        println!(
            "{:<20} {:>9.4} {:>11.4} {:>11.4} {:>10.4} {:>8.4} {:>8.4} {:>8.4}",
            c.kind.name(),
            m.accuracy,
            m.sensitivity,
            m.specificity,
            m.precision,
            m.f1,
            m.mcc,
            c.auc
        );
    }
}

fn run_one(opts: &PipelineOpts) -> anyhow::Result<()> {
    let config = opts.build_config()?;
    let report: RunReport<f64> = pipeline::run_experiment(&config)?;
    print_classifier_table(&report);
    println!(
        "selected features (one-based): {}",
        report.selected.to_one_based_string()
    );
    println!(
        "train rows: {} -> {} after balancing; test rows: {}",
        report.train_rows,
        report.train_counts_after.0 + report.train_counts_after.1,
        report.test_rows
    );
    let written = pipeline::emit_run_report(&report, &config.output_dir, config.save_models)?;
    println!(
        "wrote {} files to {}",
        written.len(),
        config.output_dir.display()
    );
    print!("{}", pipeline::format_timings(&report.timings));
    Ok(())
}

fn compare(opts: &PipelineOpts) -> anyhow::Result<()> {
    let config = opts.build_config()?;
    let table: pipeline::ComparisonTable<f64> = pipeline::compare_variants(&config)?;
    println!(
        "{:<20} {:>10} {:>10} {:>10} {:>10}",
        "accuracy", "baseline", "+SMOTE", "+FS", "+SMOTE+FS"
    );
    for &kind in &table.kinds {
        print!("{:<20}", kind.name());
        for variant in Variant::ALL {
            print!(" {:>10.4}", table.cell(kind, variant).metrics.accuracy);
        }
        println!();
    }
    let written = pipeline::emit_comparison(&table, &config.output_dir, config.save_models)?;
    println!(
        "wrote {} files to {}",
        written.len(),
        config.output_dir.display()
    );
    for (variant, report) in &table.reports {
        println!("stage timings [{}]:", variant.label());
        print!("{}", pipeline::format_timings(&report.timings));
    }
    Ok(())
}

fn select(opts: &PipelineOpts) -> anyhow::Result<()> {
    let config = opts.build_config()?;
    let prepared = pipeline::prepare::<f64>(&config)?;
    let (train, before, after) = pipeline::training_set(&config, &prepared, config.smote)?;
    if config.smote {
        println!(
            "training rows balanced {}:{} -> {}:{}",
            before.0, before.1, after.0, after.1
        );
    }
    let (subset, trace) = pipeline::select_features(&config, &train)?;
    println!(
        "selected features (one-based): {}",
        subset.to_one_based_string()
    );
    println!(
        "iterations: {}; evaluations: {} ({} cache hits); best fitness: {}",
        trace.best_fitness.len(),
        trace.evaluations,
        trace.cache_hits,
        trace.best_fitness.last().copied().unwrap_or(f64::NAN)
    );
    print!("{}", trace.to_csv());

    let out = opts.out.as_ref().unwrap_or(&config.output_dir);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let trace_path = out.join("bwo_trace.csv");
    std::fs::write(&trace_path, trace.to_csv())
        .with_context(|| format!("writing {}", trace_path.display()))?;
    let features_path = out.join("selected_features.txt");
    let text: String = subset
        .one_based_sorted()
        .iter()
        .map(|i| format!("{i}\n"))
        .collect();
    std::fs::write(&features_path, text)
        .with_context(|| format!("writing {}", features_path.display()))?;
    println!(
        "wrote {} and {}",
        trace_path.display(),
        features_path.display()
    );
    Ok(())
}

fn parse_row(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .with_context(|| format!("bad feature value {cell:?}"))
        })
        .collect()
}

fn parse_feature_file(path: &Path) -> anyhow::Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut indices = Vec::new();
    for token in text.split(|c: char| c == ';' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        let one_based: usize = token
            .parse()
            .with_context(|| format!("bad feature index {token:?}"))?;
        if one_based == 0 {
            bail!("feature indices are one-based; found 0");
        }
        indices.push(one_based - 1);
    }
    if indices.is_empty() {
        bail!("{} contains no feature indices", path.display());
    }
    Ok(indices)
}

fn predict(opts: &PredictOpts) -> anyhow::Result<()> {
    let model: diabml::TrainedModel64 = load_model(&opts.model)?;
    let mut row = parse_row(&opts.row)?;

    if let Some(path) = &opts.scaler {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let (_, scaler): (_, ScalerParams<f64>) = ScalerParams::parse_csv(&text)?;
        if scaler.n_features() != row.len() {
            bail!(
                "scaler covers {} features but the row has {}",
                scaler.n_features(),
                row.len()
            );
        }
        for (c, v) in row.iter_mut().enumerate() {
            let (lo, hi) = scaler.column_bounds(c);
            *v = if hi == lo {
                0.0
            } else {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            };
        }
    }
    if let Some(path) = &opts.features {
        let indices = parse_feature_file(path)?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= row.len()) {
            bail!(
                "feature index {} exceeds the row width {}",
                bad + 1,
                row.len()
            );
        }
        row = indices.into_iter().map(|i| row[i]).collect();
    }
    if row.len() != model.n_features() {
        bail!(
            "model expects {} features but the row has {} (use --features \
             with the run's selected_features.txt)",
            model.n_features(),
            row.len()
        );
    }

    let features = ndarray::Array2::from_shape_vec((1, row.len()), row)?;
    let scores = model.predict_scores(&features)?;
    let label = u8::from(scores[0] >= 0.5);
    println!("label: {label}");
    println!("score: {}", scores[0]);
    Ok(())
}

fn synth(opts: &SynthOpts) -> anyhow::Result<()> {
    let mut indices = Vec::new();
    for token in opts.informative.split([';', ',']) {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let one_based: usize = token
            .parse()
            .with_context(|| format!("bad informative index {token:?}"))?;
        if one_based == 0 {
            bail!("informative indices are one-based; found 0");
        }
        indices.push(one_based - 1);
    }
    let total = indices.len() + opts.noise;
    let informative = FeatureSubset::new(indices, total)?;
    let data: diabml::Dataset64 = pipeline::synth_dataset(
        opts.seed,
        opts.rows,
        &informative,
        opts.noise,
        opts.flip,
        opts.imbalance,
    )?;
    dataio::write_csv(&data, &opts.label_column, &opts.out)?;
    let (neg, pos) = data.class_counts();
    println!(
        "wrote {} rows x {} features to {} (class 0: {neg}, class 1: {pos})",
        data.n_rows(),
        data.n_features(),
        opts.out.display()
    );
    Ok(())
}
