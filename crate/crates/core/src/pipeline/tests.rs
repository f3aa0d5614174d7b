use super::*;
use ndarray::Array2;

fn planted_subset() -> FeatureSubset {
    FeatureSubset::new(vec![0, 1, 2], 8).unwrap()
}

fn small_data(seed: u64, rows: usize) -> Dataset<f64> {
    synth_dataset(seed, rows, &planted_subset(), 5, 0.02, 0.3).unwrap()
}

/// Small, fast configuration used throughout these tests.
fn fast_config() -> PipelineConfig {
    let mut config = PipelineConfig::new("unused.csv").with_seed(11);
    config.kinds = vec![
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
        ClassifierKind::DecisionTree,
    ];
    config.settings.logistic.epochs = 50;
    config.selection.bwo = BwoConfig {
        population_size: 10,
        max_iterations: 6,
        subset_size: 3,
        seed: config.selection.bwo.seed,
        ..BwoConfig::default()
    };
    config.selection.sample_cap = Some(400);
    config
}

#[test]
fn synth_noiseless_balanced_is_memorizable() {
    let data: Dataset<f64> = synth_dataset(3, 200, &planted_subset(), 5, 0.0, 0.5).unwrap();
    let (neg, pos) = data.class_counts();
    assert_eq!(pos, 100);
    assert_eq!(neg, 100);
    // A deep enough tree on the informative columns memorizes the labels.
    let informative = data.subset_columns(&[0, 1, 2]).unwrap();
    let mut config = ClassifierConfig::new(ClassifierKind::DecisionTree);
    config.tree.max_depth = 64;
    let model = classifiers::train(&config, informative.features(), informative.labels()).unwrap();
    let predicted = model.predict_labels(informative.features()).unwrap();
    assert_eq!(predicted, informative.labels());
}

#[test]
fn synth_imbalance_gives_requested_prevalence() {
    let data: Dataset<f64> = synth_dataset(4, 2000, &planted_subset(), 13, 0.0, 0.14).unwrap();
    let (_, pos) = data.class_counts();
    let prevalence = pos as f64 / 2000.0;
    assert!((prevalence - 0.14).abs() <= 0.01);
}

#[test]
fn synth_is_deterministic_and_validates() {
    let a: Dataset<f64> = small_data(9, 50);
    let b: Dataset<f64> = small_data(9, 50);
    assert_eq!(a, b);
    assert!(synth_dataset::<f64>(0, 50, &planted_subset(), 5, 0.5, 0.5).is_err());
    assert!(synth_dataset::<f64>(0, 50, &planted_subset(), 5, 0.0, 0.0).is_err());
    assert!(synth_dataset::<f64>(0, 1, &planted_subset(), 5, 0.0, 0.5).is_err());
    // Informative index outside the total feature count.
    let wide = FeatureSubset::new(vec![0, 9], 10).unwrap();
    assert!(synth_dataset::<f64>(0, 50, &wide, 0, 0.0, 0.5).is_err());
}

#[test]
fn feature_selection_off_reports_the_full_feature_set() {
    let mut config = fast_config();
    config.feature_selection = false;
    config.smote = false;
    let report = run_experiment_on(&config, small_data(5, 300)).unwrap();
    assert_eq!(report.selected.one_based_sorted(), (1..=8).collect::<Vec<_>>());
    assert!(report.trace.is_none());
    assert_eq!(report.classifiers.len(), 3);
}

#[test]
fn smote_counts_follow_the_balance_formula() {
    let mut config = fast_config();
    config.feature_selection = false;
    config.smote = true;
    config.smote_config.target_ratio = 0.8;
    let report = run_experiment_on(&config, small_data(6, 400)).unwrap();
    let (neg_before, pos_before) = report.train_counts_before;
    let (neg_after, pos_after) = report.train_counts_after;
    // Class 1 is the minority in this synthetic set.
    assert!(pos_before < neg_before);
    assert_eq!(neg_after, neg_before);
    let wanted = (0.8 * neg_before as f64).ceil() as usize;
    assert_eq!(pos_after, pos_before.max(wanted));
}

#[test]
fn runs_are_deterministic_and_match_the_comparison_cell() {
    let config = fast_config();
    let data = small_data(7, 350);

    let mut smote_only = config.clone();
    smote_only.smote = true;
    smote_only.feature_selection = false;
    let solo_a = run_experiment_on(&smote_only, data.clone()).unwrap();
    let solo_b = run_experiment_on(&smote_only, data.clone()).unwrap();
    assert_eq!(solo_a.classifiers, solo_b.classifiers);

    let table = compare_variants_on(&config, data).unwrap();
    assert_eq!(
        table.report(Variant::Smote).classifiers,
        solo_a.classifiers
    );
}

#[test]
fn variants_share_the_split() {
    let table = compare_variants_on(&fast_config(), small_data(8, 300)).unwrap();
    let baseline = table.report(Variant::Baseline);
    for variant in [Variant::Smote, Variant::Fs, Variant::SmoteFs] {
        let report = table.report(variant);
        assert_eq!(report.train_rows, baseline.train_rows);
        assert_eq!(report.test_rows, baseline.test_rows);
        assert_eq!(report.test_counts, baseline.test_counts);
        assert_eq!(report.train_counts_before, baseline.train_counts_before);
    }
}

/// No stage before evaluation may depend on test-row feature values: with
/// the same labels (hence the same split), mangling every test row must
/// leave the scaler, the SMOTE output, the selected subset and the trained
/// models bit-identical in fit-on-train mode.
#[test]
fn test_rows_never_leak_into_training_stages() {
    let config = fast_config();
    let data = small_data(10, 400);
    let prepared: PreparedData<f64> = prepare_dataset(&config, data.clone()).unwrap();

    let mut mangled_features: Array2<f64> = data.features().clone();
    for &r in &prepared.split.test_rows {
        for v in mangled_features.row_mut(r).iter_mut() {
            *v = *v * 3.0 + 7.0;
        }
    }
    let mangled = Dataset::new(
        data.feature_names().to_vec(),
        mangled_features,
        data.labels().to_vec(),
    )
    .unwrap();

    let a = run_experiment_on(&config, data.clone()).unwrap();
    let b = run_experiment_on(&config, mangled.clone()).unwrap();
    assert_eq!(a.scaler, b.scaler, "scaler must be fit on train rows only");
    assert_eq!(a.selected, b.selected, "selection must only see train rows");
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.train_counts_after, b.train_counts_after);
    assert_eq!(a.models, b.models, "models must only see train rows");

    // Sanity that the check has teeth: fit-on-all mode does leak the
    // mangled test values into the scaler.
    let mut leaky = config;
    leaky.normalize = NormalizeMode::FitOnAll;
    let c = run_experiment_on(&leaky, data).unwrap();
    let d = run_experiment_on(&leaky, mangled).unwrap();
    assert_ne!(c.scaler, d.scaler);
}

#[test]
fn stage_errors_are_tagged() {
    let mut config = fast_config();
    config.data_path = PathBuf::from("/nonexistent/data.csv");
    match run_experiment::<f64>(&config).unwrap_err() {
        Error::Stage { stage: "load", .. } => {}
        other => panic!("expected a load-stage error, got {other}"),
    }

    // Single-class data fails in the clean stage.
    let features = Array2::from_shape_fn((40, 3), |(r, c)| (r * 3 + c) as f64);
    let single = Dataset::new(
        vec!["a".into(), "b".into(), "c".into()],
        features,
        vec![1u8; 40],
    )
    .unwrap();
    match run_experiment_on(&fast_config(), single).unwrap_err() {
        Error::Stage { stage: "clean", .. } => {}
        other => panic!("expected a clean-stage error, got {other}"),
    }
}

#[test]
fn config_validation_rejects_bad_lists() {
    let mut config = fast_config();
    config.kinds.clear();
    assert!(config.validate().is_err());
    config = fast_config();
    config.kinds = vec![ClassifierKind::Knn, ClassifierKind::Knn];
    assert!(config.validate().is_err());
    config = fast_config();
    config.test_fraction = 1.5;
    assert!(config.validate().is_err());
}

#[test]
fn classifier_configs_have_distinct_per_kind_seeds() {
    let mut config = fast_config();
    config.kinds = ClassifierKind::ALL.to_vec();
    let configs = config.classifier_configs();
    let mut seeds: Vec<u64> = configs.iter().map(|c| c.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 8);
    // Per-kind, not per-position: reordering the list keeps each kind's seed.
    config.kinds.reverse();
    let reversed = config.classifier_configs();
    for c in &configs {
        let same_kind = reversed.iter().find(|r| r.kind == c.kind).unwrap();
        assert_eq!(same_kind.seed, c.seed);
    }
}

#[test]
fn key_value_file_parsing() {
    let text = "# comment\n\ndata: a.csv\nseed: 9\nseed: 10\nsmote: off\n";
    let pairs = parse_key_values(text).unwrap();
    assert_eq!(
        pairs,
        vec![
            ("data".to_string(), "a.csv".to_string()),
            ("seed".to_string(), "10".to_string()),
            ("smote".to_string(), "off".to_string()),
        ]
    );
    assert!(parse_key_values("no separator here").is_err());
}

#[test]
fn key_values_apply_onto_the_config() {
    let mut config = PipelineConfig::new("x.csv");
    let pairs = parse_key_values(
        "seed: 5\nclassifiers: nb, ada\nfs-n: 4\nfs-cap: none\nknn-cap: 1000\n\
         normalize: all\nsmote-ratio: 0.5\nfs-patience: 7\ntree-depth: 3\nsave-models: on\n",
    )
    .unwrap();
    config.apply_key_values(&pairs).unwrap();
    assert_eq!(config.seed, 5);
    assert_eq!(
        config.kinds,
        vec![ClassifierKind::NaiveBayes, ClassifierKind::AdaBoost]
    );
    assert_eq!(config.selection.bwo.subset_size, 4);
    assert_eq!(config.selection.sample_cap, None);
    assert_eq!(config.settings.knn.reference_cap, Some(1000));
    assert_eq!(config.normalize, NormalizeMode::FitOnAll);
    assert_eq!(config.smote_config.target_ratio, 0.5);
    assert_eq!(config.selection.bwo.patience, Some(7));
    assert_eq!(config.settings.tree.max_depth, 3);
    assert!(config.save_models);

    assert!(config
        .apply_key_values(&[("bogus".into(), "1".into())])
        .is_err());
    assert!(config
        .apply_key_values(&[("seed".into(), "abc".into())])
        .is_err());
}

#[test]
fn reseed_rederives_component_seeds() {
    let a = PipelineConfig::new("x.csv").with_seed(1);
    let b = PipelineConfig::new("x.csv").with_seed(2);
    assert_ne!(a.smote_config.seed, b.smote_config.seed);
    assert_ne!(a.selection.bwo.seed, b.selection.bwo.seed);
    assert_ne!(a.smote_config.seed, a.selection.bwo.seed);
}

#[test]
fn emitted_files_match_the_counting_contract() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fast_config();
    config.kinds = ClassifierKind::ALL.to_vec();
    config.settings.forest.n_trees = 5;
    config.settings.mlp.epochs = 3;
    config.settings.logistic.epochs = 30;
    config.settings.adaboost.rounds = 10;
    config.settings.svm.epochs = 3;
    let report = run_experiment_on(&config, small_data(12, 300)).unwrap();
    let written = emit_run_report(&report, dir.path(), true).unwrap();

    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
        .collect();
    let roc_files = names.iter().filter(|n| n.starts_with("roc_")).count();
    assert_eq!(roc_files, 8);
    assert!(names.contains(&"metrics.json".to_string()));
    assert!(names.contains(&"selected_features.txt".to_string()));
    assert!(names.contains(&"clean_report.txt".to_string()));
    assert!(names.contains(&"scaler.csv".to_string()));
    assert!(names.contains(&"bwo_trace.csv".to_string()));
    let model_files = names.iter().filter(|n| n.starts_with("model_")).count();
    assert_eq!(model_files, 8);

    // A saved model round-trips through the predict entry point.
    let loaded: TrainedModel<f64> =
        classifiers::load_model(&dir.path().join("model_decision_tree.txt")).unwrap();
    assert_eq!(loaded.kind(), ClassifierKind::DecisionTree);
}

#[test]
fn rerun_emits_byte_identical_files() {
    let config = fast_config();
    let data = small_data(13, 300);
    let table_a = compare_variants_on(&config, data.clone()).unwrap();
    let table_b = compare_variants_on(&config, data).unwrap();

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let written_a = emit_comparison(&table_a, dir_a.path(), false).unwrap();
    let written_b = emit_comparison(&table_b, dir_b.path(), false).unwrap();
    assert_eq!(written_a.len(), written_b.len());
    for (a, b) in written_a.iter().zip(&written_b) {
        let bytes_a = std::fs::read(a).unwrap();
        let bytes_b = std::fs::read(b).unwrap();
        assert_eq!(bytes_a, bytes_b, "{a:?} vs {b:?}");
    }
}

#[test]
fn comparison_csv_has_the_grid_shape() {
    let mut config = fast_config();
    config.kinds = vec![ClassifierKind::NaiveBayes, ClassifierKind::DecisionTree];
    let table = compare_variants_on(&config, small_data(14, 300)).unwrap();
    let csv = table.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2); // header + one row per classifier
    let header_fields = lines[0].split(',').count();
    assert_eq!(header_fields, 1 + 4 * 7); // classifier + 4 variants x 7 metrics
    assert!(lines[0].starts_with("classifier,baseline_accuracy"));
    assert!(lines[1].starts_with("naive_bayes,"));

    let ablation = table.fs_ablation_csv();
    assert_eq!(ablation.lines().count(), 1 + 2);
}

#[test]
fn metrics_json_is_valid_and_flat_per_classifier() {
    let mut config = fast_config();
    config.smote = false;
    let report = run_experiment_on(&config, small_data(15, 300)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_run_report(&report, dir.path(), false).unwrap();
    let text = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["rows"], 300);
    assert_eq!(value["smote"]["applied"], false);
    let first = &value["classifiers"][0];
    assert!(first["accuracy"].is_f64() || first["accuracy"].is_u64());
    assert!(first["mcc_undefined"].is_boolean());
    assert!(first["confusion"]["fn"].is_u64());
}
