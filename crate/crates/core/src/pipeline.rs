//! End-to-end orchestration: load, clean, split, normalize, oversample the
//! training rows, select features on the training rows, train every
//! configured classifier and evaluate on the untouched test rows.
//!
//! Everything downstream of the split only ever sees training rows; the
//! test partition is touched exactly once, at evaluation. The entire run is
//! a pure function of the config (wall-clock timings are kept in memory for
//! display but never written into report files).

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::balance::{self, SmoteConfig};
use crate::bwo::{self, BwoConfig, BwoTrace, FeatureSubset, SubsetAccuracy};
use crate::classifiers::{self, ClassifierConfig, ClassifierKind, TrainedModel};
use crate::dataio::{self, CleanReport, Dataset, ScalerParams, SplitIndices};
use crate::error::{Error, Result};
use crate::metrics::{self, ConfusionCounts, MetricsReport, RocCurve};
use crate::scalar::Scalar;
use crate::seeding;

/// Whether the MinMax scaler is fitted on the training rows only
/// (leakage-safe, the default) or on every row before the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    FitOnTrain,
    FitOnAll,
}

/// Wrapper-selection settings: the optimizer itself plus its fitness
/// surrogate and the internal carve-out it is scored on.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub bwo: BwoConfig,
    pub surrogate: ClassifierConfig,
    pub holdout_fraction: f64,
    pub sample_cap: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            bwo: BwoConfig::default(),
            surrogate: bwo::default_surrogate(0),
            holdout_fraction: 0.25,
            sample_cap: Some(20_000),
        }
    }
}

/// One experiment's full recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub data_path: PathBuf,
    pub label_column: String,
    pub test_fraction: f64,
    pub seed: u64,
    pub normalize: NormalizeMode,
    pub smote: bool,
    pub smote_config: SmoteConfig,
    pub feature_selection: bool,
    pub selection: SelectionConfig,
    pub kinds: Vec<ClassifierKind>,
    /// Settings template shared by every classifier; each kind reads its
    /// own family's fields and gets a seed derived from the master seed.
    pub settings: ClassifierConfig,
    pub output_dir: PathBuf,
    pub save_models: bool,
}

impl PipelineConfig {
    pub fn new(data_path: impl Into<PathBuf>) -> Self {
        let mut config = PipelineConfig {
            data_path: data_path.into(),
            label_column: "Diabetes_binary".to_string(),
            test_fraction: 0.2,
            seed: 0,
            normalize: NormalizeMode::FitOnTrain,
            smote: true,
            smote_config: SmoteConfig::default(),
            feature_selection: true,
            selection: SelectionConfig::default(),
            kinds: ClassifierKind::ALL.to_vec(),
            settings: ClassifierConfig::new(ClassifierKind::DecisionTree),
            output_dir: PathBuf::from("."),
            save_models: false,
        };
        config.reseed(0);
        config
    }

    /// Sets the master seed and re-derives every component seed from it.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.smote_config.seed = seeding::derive(seed, 1);
        self.selection.bwo.seed = seeding::derive(seed, 2);
        self.selection.surrogate.seed = seeding::derive(seed, 3);
        self.settings.seed = seed;
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.reseed(seed);
        self
    }

    /// The per-kind classifier configs materialized from the template.
    /// Seeds are derived per kind, not per list position.
    pub fn classifier_configs(&self) -> Vec<ClassifierConfig> {
        self.kinds
            .iter()
            .map(|&kind| {
                let mut config = self.settings.clone();
                config.kind = kind;
                let salt = ClassifierKind::ALL.iter().position(|&k| k == kind).unwrap();
                config.seed = seeding::derive(self.seed, 16 + salt as u64);
                config
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::InvalidParam(
                "at least one classifier is required".into(),
            ));
        }
        let mut sorted = self.kinds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.kinds.len() {
            return Err(Error::InvalidParam(
                "classifier kinds must be distinct".into(),
            ));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParam(
                "test_fraction must be in (0,1)".into(),
            ));
        }
        if !(self.selection.holdout_fraction > 0.0 && self.selection.holdout_fraction < 1.0) {
            return Err(Error::InvalidParam(
                "selection holdout_fraction must be in (0,1)".into(),
            ));
        }
        self.smote_config.validate()?;
        Ok(())
    }

    /// Applies documented `key: value` pairs (config file or CLI flags)
    /// onto this config. Unknown keys are rejected.
    pub fn apply_key_values(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (key, value) in pairs {
            self.apply_key_value(key, value)?;
        }
        Ok(())
    }

    fn apply_key_value(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParam(format!("{key}: bad {what} {value:?}"));
        let as_f64 = || value.parse::<f64>().map_err(|_| bad("number"));
        let as_usize = || value.parse::<usize>().map_err(|_| bad("count"));
        let as_u64 = || value.parse::<u64>().map_err(|_| bad("integer"));
        let as_bool = || match value {
            "on" | "true" | "yes" | "1" => Ok(true),
            "off" | "false" | "no" | "0" => Ok(false),
            _ => Err(bad("flag")),
        };
        match key {
            "data" => self.data_path = PathBuf::from(value),
            "label-column" => self.label_column = value.to_string(),
            "test-fraction" => self.test_fraction = as_f64()?,
            "seed" => self.reseed(as_u64()?),
            "out" => self.output_dir = PathBuf::from(value),
            "save-models" => self.save_models = as_bool()?,
            "normalize" => {
                self.normalize = match value {
                    "train" => NormalizeMode::FitOnTrain,
                    "all" => NormalizeMode::FitOnAll,
                    _ => return Err(bad("mode (train|all)")),
                }
            }
            "classifiers" => {
                if value == "all" {
                    self.kinds = ClassifierKind::ALL.to_vec();
                } else {
                    let kinds: Option<Vec<ClassifierKind>> = value
                        .split([',', ' '])
                        .filter(|s| !s.is_empty())
                        .map(ClassifierKind::from_name)
                        .collect();
                    self.kinds = kinds.ok_or_else(|| bad("classifier list"))?;
                }
            }
            "smote" => self.smote = as_bool()?,
            "smote-k" => self.smote_config.k_neighbors = as_usize()?,
            "smote-ratio" => self.smote_config.target_ratio = as_f64()?,
            "fs" => self.feature_selection = as_bool()?,
            "fs-n" => self.selection.bwo.subset_size = as_usize()?,
            "fs-population" => self.selection.bwo.population_size = as_usize()?,
            "fs-iterations" => self.selection.bwo.max_iterations = as_usize()?,
            "fs-procreation" => self.selection.bwo.procreation_rate = as_f64()?,
            "fs-cannibalism" => self.selection.bwo.cannibalism_rate = as_f64()?,
            "fs-mutation" => self.selection.bwo.mutation_rate = as_f64()?,
            "fs-pairs" => self.selection.bwo.offspring_pairs_per_mating = as_usize()?,
            "fs-patience" => {
                self.selection.bwo.patience = if value == "off" {
                    None
                } else {
                    Some(as_usize()?)
                }
            }
            "fs-holdout" => self.selection.holdout_fraction = as_f64()?,
            "fs-cap" => {
                self.selection.sample_cap = if value == "none" {
                    None
                } else {
                    Some(as_usize()?)
                }
            }
            "fs-surrogate" => {
                self.selection.surrogate.kind =
                    ClassifierKind::from_name(value).ok_or_else(|| bad("classifier kind"))?
            }
            "nb-var-floor" => self.settings.naive_bayes.variance_floor = as_f64()?,
            "lr-rate" => self.settings.logistic.learning_rate = as_f64()?,
            "lr-epochs" => self.settings.logistic.epochs = as_usize()?,
            "tree-depth" => self.settings.tree.max_depth = as_usize()?,
            "tree-min-split" => self.settings.tree.min_samples_split = as_usize()?,
            "knn-k" => self.settings.knn.k = as_usize()?,
            "knn-cap" => {
                self.settings.knn.reference_cap = if value == "none" {
                    None
                } else {
                    Some(as_usize()?)
                }
            }
            "rf-trees" => self.settings.forest.n_trees = as_usize()?,
            "rf-depth" => self.settings.forest.max_depth = as_usize()?,
            "svm-lambda" => self.settings.svm.lambda = as_f64()?,
            "svm-epochs" => self.settings.svm.epochs = as_usize()?,
            "mlp-hidden" => self.settings.mlp.hidden = as_usize()?,
            "mlp-rate" => self.settings.mlp.learning_rate = as_f64()?,
            "mlp-epochs" => self.settings.mlp.epochs = as_usize()?,
            "ada-rounds" => self.settings.adaboost.rounds = as_usize()?,
            _ => return Err(Error::InvalidParam(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}

/// Parses the flat `key: value` config-file format: one pair per line,
/// `#` comments and blank lines ignored, later keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| {
            Error::InvalidParam(format!("config line {}: expected key: value", i + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(existing) = pairs.iter_mut().find(|(k, _)| *k == key) {
            existing.1 = value;
        } else {
            pairs.push((key, value));
        }
    }
    Ok(pairs)
}

/// Everything the four ablation variants share: cleaned and normalized
/// data plus the train/test partition.
#[derive(Debug, Clone)]
pub struct PreparedData<T: Scalar> {
    pub data: Dataset<T>,
    pub clean: CleanReport,
    pub split: SplitIndices,
    pub scaler: ScalerParams<T>,
    timings: Vec<(String, f64)>,
}

/// Per-classifier evaluation on the test rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierReport {
    pub kind: ClassifierKind,
    pub confusion: ConfusionCounts,
    pub metrics: MetricsReport,
    pub auc: f64,
    pub roc: RocCurve,
}

/// One experiment's results. Timings are in seconds and are never written
/// into report files (they are not a function of the config).
#[derive(Debug, Clone)]
pub struct RunReport<T: Scalar> {
    pub rows: usize,
    pub features: usize,
    pub clean: CleanReport,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_counts_before: (usize, usize),
    pub train_counts_after: (usize, usize),
    pub test_counts: (usize, usize),
    pub selected: FeatureSubset,
    pub trace: Option<BwoTrace>,
    pub classifiers: Vec<ClassifierReport>,
    pub models: Vec<TrainedModel<T>>,
    pub scaler: ScalerParams<T>,
    pub feature_names: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

impl<T: Scalar> RunReport<T> {
    pub fn classifier(&self, kind: ClassifierKind) -> Option<&ClassifierReport> {
        self.classifiers.iter().find(|c| c.kind == kind)
    }
}

/// The four ablation cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Baseline,
    Smote,
    Fs,
    SmoteFs,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::Smote, Variant::Fs, Variant::SmoteFs];

    /// Stable key used in file names and CSV headers.
    pub fn key(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Smote => "smote",
            Variant::Fs => "fs",
            Variant::SmoteFs => "smote_fs",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Smote => "+SMOTE",
            Variant::Fs => "+FS",
            Variant::SmoteFs => "+SMOTE+FS",
        }
    }

    pub fn toggles(self) -> (bool, bool) {
        match self {
            Variant::Baseline => (false, false),
            Variant::Smote => (true, false),
            Variant::Fs => (false, true),
            Variant::SmoteFs => (true, true),
        }
    }
}

/// The ablation grid: one full run per variant over a shared split.
#[derive(Debug, Clone)]
pub struct ComparisonTable<T: Scalar> {
    pub kinds: Vec<ClassifierKind>,
    pub reports: Vec<(Variant, RunReport<T>)>,
}

impl<T: Scalar> ComparisonTable<T> {
    pub fn report(&self, variant: Variant) -> &RunReport<T> {
        &self
            .reports
            .iter()
            .find(|(v, _)| *v == variant)
            .expect("all four variants present")
            .1
    }

    pub fn cell(&self, kind: ClassifierKind, variant: Variant) -> &ClassifierReport {
        self.report(variant)
            .classifier(kind)
            .expect("complete grid")
    }

    /// Wide CSV: one row per classifier, one column group per variant.
    pub fn to_csv(&self) -> String {
        let metrics = [
            "accuracy",
            "sensitivity",
            "specificity",
            "precision",
            "f1",
            "mcc",
            "auc",
        ];
        let mut out = String::from("classifier");
        for variant in Variant::ALL {
            for metric in metrics {
                out.push_str(&format!(",{}_{metric}", variant.key()));
            }
        }
        out.push('\n');
        for &kind in &self.kinds {
            out.push_str(kind.name());
            for variant in Variant::ALL {
                let cell = self.cell(kind, variant);
                let m = &cell.metrics;
                for value in [
                    m.accuracy,
                    m.sensitivity,
                    m.specificity,
                    m.precision,
                    m.f1,
                    m.mcc,
                    cell.auc,
                ] {
                    out.push_str(&format!(",{value}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Accuracy with vs without feature selection, per classifier, for both
    /// the plain and the SMOTE-balanced pipeline.
    pub fn fs_ablation_csv(&self) -> String {
        let mut out = String::from(
            "classifier,baseline_accuracy,fs_accuracy,fs_improved,\
             smote_accuracy,smote_fs_accuracy,smote_fs_improved\n",
        );
        for &kind in &self.kinds {
            let base = self.cell(kind, Variant::Baseline).metrics.accuracy;
            let fs = self.cell(kind, Variant::Fs).metrics.accuracy;
            let smote = self.cell(kind, Variant::Smote).metrics.accuracy;
            let smote_fs = self.cell(kind, Variant::SmoteFs).metrics.accuracy;
            out.push_str(&format!(
                "{},{base},{fs},{},{smote},{smote_fs},{}\n",
                kind.name(),
                fs > base,
                smote_fs > smote,
            ));
        }
        out
    }
}

fn timed<T>(
    timings: &mut Vec<(String, f64)>,
    stage: &'static str,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    timings.push((stage.to_string(), start.elapsed().as_secs_f64()));
    Ok(out)
}

/// Loads, cleans, splits and normalizes according to the config.
pub fn prepare<T: Scalar>(config: &PipelineConfig) -> Result<PreparedData<T>> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let mut timings = Vec::new();
    let raw: Dataset<T> = timed(&mut timings, "load", || {
        dataio::load_csv(&config.data_path, &config.label_column)
    })?;
    prepare_loaded(config, raw, timings)
}

/// [`prepare`] for an already loaded dataset (synthetic data, tests).
pub fn prepare_dataset<T: Scalar>(
    config: &PipelineConfig,
    data: Dataset<T>,
) -> Result<PreparedData<T>> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    prepare_loaded(config, data, Vec::new())
}

fn prepare_loaded<T: Scalar>(
    config: &PipelineConfig,
    raw: Dataset<T>,
    mut timings: Vec<(String, f64)>,
) -> Result<PreparedData<T>> {
    let (cleaned, clean) = timed(&mut timings, "clean", || dataio::clean(&raw))?;
    let split = timed(&mut timings, "split", || {
        dataio::stratified_split(&cleaned, config.test_fraction, config.seed)
    })?;
    let (data, scaler) = timed(&mut timings, "normalize", || {
        let scaler = match config.normalize {
            NormalizeMode::FitOnTrain => dataio::fit_minmax(&cleaned, &split.train_rows)?,
            NormalizeMode::FitOnAll => {
                let all: Vec<usize> = (0..cleaned.n_rows()).collect();
                dataio::fit_minmax(&cleaned, &all)?
            }
        };
        Ok((dataio::apply_minmax(&cleaned, &scaler)?, scaler))
    })?;
    Ok(PreparedData {
        data,
        clean,
        split,
        scaler,
        timings,
    })
}

fn class_counts(labels: &[u8]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    (labels.len() - pos, pos)
}

/// The (optionally SMOTE-augmented) training partition, with class counts
/// before and after augmentation.
#[allow(clippy::type_complexity)]
pub fn training_set<T: Scalar>(
    config: &PipelineConfig,
    prepared: &PreparedData<T>,
    smote: bool,
) -> Result<(Dataset<T>, (usize, usize), (usize, usize))> {
    let train = prepared.data.subset_rows(&prepared.split.train_rows)?;
    let before = train.class_counts();
    let train = if smote {
        let (features, labels) =
            balance::smote_oversample(train.features(), train.labels(), &config.smote_config)?;
        Dataset::new(prepared.data.feature_names().to_vec(), features, labels)?
    } else {
        train
    };
    let after = train.class_counts();
    Ok((train, before, after))
}

/// Wrapper feature selection over a training set: the optimizer scores
/// subsets by surrogate accuracy on an internal carve-out of these rows.
pub fn select_features<T: Scalar>(
    config: &PipelineConfig,
    train: &Dataset<T>,
) -> Result<(FeatureSubset, BwoTrace)> {
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let fitness = SubsetAccuracy::with_holdout(
        train,
        &rows,
        config.selection.holdout_fraction,
        config.selection.sample_cap,
        config.selection.surrogate.clone(),
        seeding::derive(config.seed, 4),
    )?;
    let (best, trace) = bwo::bwo_optimize(&fitness, &config.selection.bwo, train.n_features())?;
    Ok((best.subset, trace))
}

/// Runs the post-split stages over prepared data with explicit SMOTE and
/// selection toggles (the ablation axes).
pub fn run_prepared<T: Scalar>(
    config: &PipelineConfig,
    prepared: &PreparedData<T>,
    smote: bool,
    feature_selection: bool,
) -> Result<RunReport<T>> {
    let mut timings = prepared.timings.clone();
    let data = &prepared.data;
    let test = data.subset_rows(&prepared.split.test_rows)?;

    let (train, train_counts_before, train_counts_after) =
        timed(&mut timings, "balance", || {
            training_set(config, prepared, smote)
        })?;

    let (selected, trace) = if feature_selection {
        timed(&mut timings, "select", || {
            let (subset, trace) = select_features(config, &train)?;
            Ok((subset, Some(trace)))
        })?
    } else {
        (FeatureSubset::full(train.n_features()), None)
    };

    let columns = selected.sorted();
    let train_final = train.subset_columns(&columns)?;
    let test_final = test.subset_columns(&columns)?;

    let configs = config.classifier_configs();
    let models: Vec<TrainedModel<T>> = timed(&mut timings, "train", || {
        configs
            .par_iter()
            .map(|c| classifiers::train(c, train_final.features(), train_final.labels()))
            .collect()
    })?;

    let classifier_reports: Vec<ClassifierReport> = timed(&mut timings, "evaluate", || {
        models
            .par_iter()
            .map(|model| {
                let scores = model.predict_scores(test_final.features())?;
                let half = T::cast(0.5);
                let predicted: Vec<u8> =
                    scores.iter().map(|&s| u8::from(s >= half)).collect();
                let confusion = metrics::confusion(test_final.labels(), &predicted)?;
                let report = metrics::compute_metrics(&confusion)?;
                let roc = metrics::roc_curve(test_final.labels(), scores.as_slice())?;
                let auc = metrics::auc(&roc);
                Ok(ClassifierReport {
                    kind: model.kind(),
                    confusion,
                    metrics: report,
                    auc,
                    roc,
                })
            })
            .collect()
    })?;

    Ok(RunReport {
        rows: data.n_rows(),
        features: data.n_features(),
        clean: prepared.clean,
        train_rows: prepared.split.train_rows.len(),
        test_rows: prepared.split.test_rows.len(),
        train_counts_before,
        train_counts_after,
        test_counts: class_counts(test.labels()),
        selected,
        trace,
        classifiers: classifier_reports,
        models,
        scaler: prepared.scaler.clone(),
        feature_names: data.feature_names().to_vec(),
        timings,
    })
}

/// One full experiment with the config's own SMOTE/selection toggles.
pub fn run_experiment<T: Scalar>(config: &PipelineConfig) -> Result<RunReport<T>> {
    let prepared = prepare(config)?;
    run_prepared(config, &prepared, config.smote, config.feature_selection)
}

/// [`run_experiment`] over an in-memory dataset.
pub fn run_experiment_on<T: Scalar>(
    config: &PipelineConfig,
    data: Dataset<T>,
) -> Result<RunReport<T>> {
    let prepared = prepare_dataset(config, data)?;
    run_prepared(config, &prepared, config.smote, config.feature_selection)
}

/// Runs all four ablation variants over one shared split so differences
/// isolate the toggled stage.
pub fn compare_variants<T: Scalar>(config: &PipelineConfig) -> Result<ComparisonTable<T>> {
    let prepared = prepare(config)?;
    compare_prepared(config, &prepared)
}

/// [`compare_variants`] over an in-memory dataset.
pub fn compare_variants_on<T: Scalar>(
    config: &PipelineConfig,
    data: Dataset<T>,
) -> Result<ComparisonTable<T>> {
    let prepared = prepare_dataset(config, data)?;
    compare_prepared(config, &prepared)
}

fn compare_prepared<T: Scalar>(
    config: &PipelineConfig,
    prepared: &PreparedData<T>,
) -> Result<ComparisonTable<T>> {
    let mut reports = Vec::with_capacity(Variant::ALL.len());
    for variant in Variant::ALL {
        let (smote, fs) = variant.toggles();
        reports.push((variant, run_prepared(config, prepared, smote, fs)?));
    }
    Ok(ComparisonTable {
        kinds: config.kinds.clone(),
        reports,
    })
}

/// Offline synthetic data with a known informative feature set: features
/// are uniform in `[0,1]`; the label marks the top `imbalance` fraction of a
/// seeded linear score over the informative columns, then flips with
/// probability `flip_rate`.
pub fn synth_dataset<T: Scalar>(
    seed: u64,
    rows: usize,
    informative: &FeatureSubset,
    noise_features: usize,
    flip_rate: f64,
    imbalance: f64,
) -> Result<Dataset<T>> {
    use rand::{Rng, SeedableRng};
    if !(0.0..0.5).contains(&flip_rate) {
        return Err(Error::InvalidParam("flip_rate must be in [0,0.5)".into()));
    }
    if !(imbalance > 0.0 && imbalance <= 1.0) {
        return Err(Error::InvalidParam("imbalance must be in (0,1]".into()));
    }
    let total_features = informative.len() + noise_features;
    for &i in informative.indices() {
        if i >= total_features {
            return Err(Error::InvalidParam(format!(
                "informative index {i} out of range for {total_features} features"
            )));
        }
    }
    let positives = (rows as f64 * imbalance).round() as usize;
    if positives == 0 || rows < 2 {
        return Err(Error::InvalidParam(
            "imbalance too small for this row count".into(),
        ));
    }

    // Draw order: informative weights (sorted by index), features
    // (row-major), then label flips (row order).
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let informative_sorted = informative.sorted();
    let weights: Vec<f64> = informative_sorted
        .iter()
        .map(|_| rng.gen_range(0.5..1.5))
        .collect();
    let features =
        ndarray::Array2::from_shape_fn((rows, total_features), |_| rng.gen_range(0.0..1.0f64));

    let scores: Vec<f64> = features
        .rows()
        .into_iter()
        .map(|row| {
            informative_sorted
                .iter()
                .zip(&weights)
                .map(|(&c, w)| w * row[c])
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite scores")
            .then(a.cmp(&b))
    });
    let mut labels = vec![0u8; rows];
    for &r in order.iter().take(positives.min(rows)) {
        labels[r] = 1;
    }
    for label in labels.iter_mut() {
        if rng.gen_bool(flip_rate) {
            *label ^= 1;
        }
    }

    let names = (1..=total_features).map(|i| format!("f{i}")).collect();
    Dataset::new(names, features.mapv(T::cast), labels)
}

#[derive(Serialize)]
struct SplitJson {
    train_rows: usize,
    test_rows: usize,
    train_class0: usize,
    train_class1: usize,
    test_class0: usize,
    test_class1: usize,
}

#[derive(Serialize)]
struct SmoteJson {
    applied: bool,
    train_class0_before: usize,
    train_class1_before: usize,
    train_class0_after: usize,
    train_class1_after: usize,
}

#[derive(Serialize)]
struct SelectionJson {
    applied: bool,
    selected_one_based: Vec<usize>,
    iterations: usize,
    evaluations: usize,
    cache_hits: usize,
}

#[derive(Serialize)]
struct ClassifierJson {
    kind: String,
    #[serde(flatten)]
    metrics: MetricsReport,
    auc: f64,
    confusion: ConfusionCounts,
}

#[derive(Serialize)]
struct RunReportJson {
    rows: usize,
    features: usize,
    clean: CleanReport,
    split: SplitJson,
    smote: SmoteJson,
    feature_selection: SelectionJson,
    classifiers: Vec<ClassifierJson>,
}

fn report_json<T: Scalar>(report: &RunReport<T>) -> String {
    let json = RunReportJson {
        rows: report.rows,
        features: report.features,
        clean: report.clean,
        split: SplitJson {
            train_rows: report.train_rows,
            test_rows: report.test_rows,
            train_class0: report.train_counts_before.0,
            train_class1: report.train_counts_before.1,
            test_class0: report.test_counts.0,
            test_class1: report.test_counts.1,
        },
        smote: SmoteJson {
            applied: report.train_counts_after != report.train_counts_before,
            train_class0_before: report.train_counts_before.0,
            train_class1_before: report.train_counts_before.1,
            train_class0_after: report.train_counts_after.0,
            train_class1_after: report.train_counts_after.1,
        },
        feature_selection: SelectionJson {
            applied: report.trace.is_some(),
            selected_one_based: report.selected.one_based_sorted(),
            iterations: report.trace.as_ref().map_or(0, |t| t.best_fitness.len()),
            evaluations: report.trace.as_ref().map_or(0, |t| t.evaluations),
            cache_hits: report.trace.as_ref().map_or(0, |t| t.cache_hits),
        },
        classifiers: report
            .classifiers
            .iter()
            .map(|c| ClassifierJson {
                kind: c.kind.name().to_string(),
                metrics: c.metrics,
                auc: c.auc,
                confusion: c.confusion,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    text
}

fn write_file(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Writes one run's artifacts into `directory`: `metrics.json`, one
/// `roc_<kind>.csv` per classifier, `selected_features.txt` (one-based),
/// `clean_report.txt`, `scaler.csv`, `bwo_trace.csv` when selection ran,
/// and `model_<kind>.txt` when `with_models` is set. File contents are a
/// pure function of the report; reruns overwrite byte-identically.
pub fn emit_run_report<T: Scalar>(
    report: &RunReport<T>,
    directory: &Path,
    with_models: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(directory).map_err(|source| Error::Io {
        path: directory.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    write_file(directory, "metrics.json", &report_json(report), &mut written)?;
    write_file(
        directory,
        "clean_report.txt",
        &report.clean.to_text(),
        &mut written,
    )?;
    let features_text: String = report
        .selected
        .one_based_sorted()
        .iter()
        .map(|i| format!("{i}\n"))
        .collect();
    write_file(directory, "selected_features.txt", &features_text, &mut written)?;
    write_file(
        directory,
        "scaler.csv",
        &report.scaler.to_csv(&report.feature_names),
        &mut written,
    )?;
    if let Some(trace) = &report.trace {
        write_file(directory, "bwo_trace.csv", &trace.to_csv(), &mut written)?;
    }
    for c in &report.classifiers {
        write_file(
            directory,
            &format!("roc_{}.csv", c.kind.name()),
            &c.roc.to_csv(),
            &mut written,
        )?;
    }
    if with_models {
        for model in &report.models {
            let name = format!("model_{}.txt", model.kind().name());
            let path = directory.join(&name);
            classifiers::save_model(model, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `comparison.csv`, `fs_ablation.csv` and one subdirectory per
/// variant containing that variant's full run artifacts.
pub fn emit_comparison<T: Scalar>(
    table: &ComparisonTable<T>,
    directory: &Path,
    with_models: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(directory).map_err(|source| Error::Io {
        path: directory.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    write_file(directory, "comparison.csv", &table.to_csv(), &mut written)?;
    write_file(directory, "fs_ablation.csv", &table.fs_ablation_csv(), &mut written)?;
    for (variant, report) in &table.reports {
        let sub = directory.join(variant.key());
        written.extend(emit_run_report(report, &sub, with_models)?);
    }
    Ok(written)
}

/// Timing lines for terminal display.
pub fn format_timings(timings: &[(String, f64)]) -> String {
    let mut out = String::new();
    for (stage, secs) in timings {
        out.push_str(&format!("{stage:>10}  {secs:8.3}s\n"));
    }
    out
}

#[cfg(test)]
mod tests;
