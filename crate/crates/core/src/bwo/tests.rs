use super::*;
use ndarray::Array2;

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn constant_fitness(_: &FeatureSubset) -> Result<f64> {
    Ok(0.5)
}

/// Fraction of the subset that overlaps the planted optimum {0..8}.
fn overlap_fitness(subset: &FeatureSubset) -> Result<f64> {
    let hits = subset.indices().iter().filter(|&&i| i < 9).count();
    Ok(hits as f64 / 9.0)
}

/// Deterministic pseudo-random landscape, stable across runs.
fn hashed_fitness(subset: &FeatureSubset) -> Result<f64> {
    let h = crate::seeding::subset_seed(99, subset.indices());
    Ok((h % 10_000) as f64 / 10_000.0)
}

fn candidate(fitness: f64, id: u64) -> Candidate {
    Candidate {
        subset: FeatureSubset::new(vec![id as usize % 5, 5 + id as usize % 5], 10).unwrap(),
        fitness,
        id,
    }
}

fn small_config() -> BwoConfig {
    BwoConfig {
        population_size: 12,
        max_iterations: 20,
        subset_size: 3,
        ..BwoConfig::default()
    }
}

#[test]
fn feature_subset_validation() {
    assert!(FeatureSubset::new(vec![0, 1, 2], 3).is_ok());
    assert!(FeatureSubset::new(vec![0, 0], 3).is_err());
    assert!(FeatureSubset::new(vec![3], 3).is_err());
    assert!(FeatureSubset::new(vec![], 3).is_err());
    let s = FeatureSubset::new(vec![8, 0, 4], 21).unwrap();
    assert_eq!(s.one_based_sorted(), vec![1, 5, 9]);
    assert_eq!(s.to_one_based_string(), "1;5;9");
}

#[test]
fn init_with_n_equal_to_f_is_the_full_set() {
    let config = BwoConfig {
        population_size: 4,
        subset_size: 5,
        ..BwoConfig::default()
    };
    let pop = init_population(&config, 5, &mut seeded(1), &constant_fitness).unwrap();
    for c in &pop {
        assert_eq!(c.subset.sorted(), vec![0, 1, 2, 3, 4]);
        assert_eq!(c.fitness, 0.5);
    }
}

#[test]
fn init_draws_valid_distinct_subsets() {
    let config = BwoConfig {
        population_size: 10,
        subset_size: 9,
        ..BwoConfig::default()
    };
    let pop = init_population(&config, 21, &mut seeded(2), &constant_fitness).unwrap();
    assert_eq!(pop.len(), 10);
    for (i, c) in pop.iter().enumerate() {
        assert_eq!(c.id, i as u64);
        let sorted = c.subset.sorted();
        assert_eq!(sorted.len(), 9);
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        assert!(sorted.iter().all(|&i| i < 21));
    }
}

#[test]
fn init_is_deterministic_for_a_fixed_seed() {
    let config = BwoConfig {
        population_size: 6,
        subset_size: 4,
        ..BwoConfig::default()
    };
    let a = init_population(&config, 12, &mut seeded(3), &constant_fitness).unwrap();
    let b = init_population(&config, 12, &mut seeded(3), &constant_fitness).unwrap();
    assert_eq!(a, b);
}

#[test]
fn select_p1_rate_one_is_the_sorted_population() {
    let pop = vec![candidate(0.2, 0), candidate(0.9, 1), candidate(0.5, 2)];
    let p1 = select_p1(&pop, 1.0);
    let fitnesses: Vec<f64> = p1.iter().map(|c| c.fitness).collect();
    assert_eq!(fitnesses, vec![0.9, 0.5, 0.2]);
}

#[test]
fn select_p1_takes_the_ceil() {
    // ceil(0.34 * 3) = 2, so the two fittest are selected.
    let pop = vec![candidate(0.9, 0), candidate(0.5, 1), candidate(0.7, 2)];
    let p1 = select_p1(&pop, 0.34);
    let fitnesses: Vec<f64> = p1.iter().map(|c| c.fitness).collect();
    assert_eq!(fitnesses, vec![0.9, 0.7]);
}

#[test]
fn select_p1_breaks_ties_by_lower_id() {
    let pop: Vec<Candidate> = (0..6).map(|id| candidate(0.4, id)).collect();
    let p1 = select_p1(&pop, 0.5);
    let ids: Vec<u64> = p1.iter().map(|c| c.id).collect();
    assert_eq!(ids, vec![0, 1, 2]);
}

#[test]
fn procreate_equal_parents_yields_the_parent() {
    let a = FeatureSubset::new(vec![2, 7, 4], 10).unwrap();
    let mut rng = seeded(5);
    for _ in 0..50 {
        for child in procreate_pair(&a, &a, 1, 10, &mut rng).unwrap() {
            assert_eq!(child, a);
        }
    }
}

#[test]
fn procreate_disjoint_parents_mixes_positions() {
    // 1,000 random masks: every child is a valid 9-subset and every
    // position carries one of the two parental genes.
    let a = FeatureSubset::new((0..9).collect(), 21).unwrap();
    let b = FeatureSubset::new((12..21).collect(), 21).unwrap();
    let mut rng = seeded(6);
    let children = procreate_pair(&a, &b, 500, 21, &mut rng).unwrap();
    assert_eq!(children.len(), 1000);
    let mut saw_mixture = false;
    for child in &children {
        let sorted = child.sorted();
        assert_eq!(sorted.len(), 9);
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        assert!(sorted.iter().all(|&i| i < 21));
        for (i, &v) in child.indices().iter().enumerate() {
            assert!(v == a.indices()[i] || v == b.indices()[i]);
        }
        let from_a = child.indices().iter().filter(|&&v| v < 9).count();
        if from_a != 0 && from_a != 9 {
            saw_mixture = true;
        }
    }
    assert!(saw_mixture, "1,000 masks should mix parents at least once");
}

#[test]
fn repair_fills_duplicates_from_absent_indices() {
    let fixed = repair(vec![3, 3, 7], 3, 10, &mut seeded(7)).unwrap();
    let sorted = fixed.sorted();
    assert_eq!(sorted.len(), 3);
    assert!(fixed.contains(3) && fixed.contains(7));
    assert_eq!(fixed.indices()[0], 3);
    assert_eq!(fixed.indices()[1], 7);
}

#[test]
fn repair_keeps_valid_subsets_unchanged() {
    let fixed = repair(vec![9, 2, 5], 3, 10, &mut seeded(8)).unwrap();
    assert_eq!(fixed.indices(), &[9, 2, 5]);
}

#[test]
fn repair_single_completion_is_forced() {
    let fixed = repair(vec![0, 1, 1], 3, 3, &mut seeded(9)).unwrap();
    assert_eq!(fixed.indices(), &[0, 1, 2]);
}

#[test]
fn repair_rejects_impossible_requests() {
    assert!(repair(vec![0], 4, 3, &mut seeded(10)).is_err());
    assert!(repair(vec![5], 2, 3, &mut seeded(10)).is_err());
}

#[test]
fn cannibalize_zero_rate_only_sorts() {
    let pop = vec![candidate(0.2, 0), candidate(0.9, 1)];
    let kept = cannibalize(pop, 0.0);
    assert_eq!(kept.len(), 2);
    assert_eq!(kept[0].fitness, 0.9);
}

#[test]
fn cannibalize_removes_the_worst_floor() {
    let pop: Vec<Candidate> = (0..10).map(|id| candidate(id as f64 / 10.0, id)).collect();
    let kept = cannibalize(pop, 0.5);
    assert_eq!(kept.len(), 5);
    assert!(kept.iter().all(|c| c.fitness >= 0.5));

    let pair = vec![candidate(0.1, 0), candidate(0.8, 1)];
    let kept = cannibalize(pair, 0.99); // floor(1.98) = 1 removed
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].fitness, 0.8);
}

#[test]
fn mutate_with_n_equal_to_f_is_identity() {
    let s = FeatureSubset::new(vec![2, 0, 1], 3).unwrap();
    assert_eq!(mutate(&s, 3, &mut seeded(11)), s);
}

#[test]
fn mutate_swaps_in_the_only_outside_index() {
    let s = FeatureSubset::new(vec![0, 1, 2], 4).unwrap();
    let m = mutate(&s, 4, &mut seeded(12));
    assert!(m.contains(3));
    assert_eq!(m.sorted().iter().filter(|&&i| i < 3).count(), 2);
}

#[test]
fn mutate_changes_exactly_one_element() {
    // 1,000 mutations: the set difference with the parent is exactly one
    // element in each direction.
    let s = FeatureSubset::new((0..9).collect(), 21).unwrap();
    let parent: std::collections::HashSet<usize> = s.indices().iter().copied().collect();
    let mut rng = seeded(13);
    for _ in 0..1000 {
        let m = mutate(&s, 21, &mut rng);
        let mutated: std::collections::HashSet<usize> = m.indices().iter().copied().collect();
        assert_eq!(mutated.len(), 9);
        assert_eq!(parent.difference(&mutated).count(), 1);
        assert_eq!(mutated.difference(&parent).count(), 1);
    }
}

#[test]
fn optimize_on_a_constant_landscape_is_flat() {
    let config = small_config();
    let (best, trace) = bwo_optimize(&constant_fitness, &config, 10).unwrap();
    assert_eq!(best.fitness, 0.5);
    assert!(trace.best_fitness.iter().all(|&f| f == 0.5));
    assert_eq!(trace.best_fitness.len(), config.max_iterations);
}

#[test]
fn optimize_recovers_the_planted_optimum_on_ten_seeds() {
    for seed in 0..10 {
        let config = BwoConfig {
            population_size: 30,
            max_iterations: 50,
            subset_size: 9,
            seed,
            ..BwoConfig::default()
        };
        let (best, trace) = bwo_optimize(&overlap_fitness, &config, 21).unwrap();
        assert_eq!(best.fitness, 1.0, "seed {seed}");
        assert_eq!(best.subset.sorted(), (0..9).collect::<Vec<_>>());
        assert!(trace.best_fitness.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn optimize_is_deterministic() {
    let config = BwoConfig {
        seed: 42,
        ..small_config()
    };
    let (best_a, trace_a) = bwo_optimize(&hashed_fitness, &config, 10).unwrap();
    let (best_b, trace_b) = bwo_optimize(&hashed_fitness, &config, 10).unwrap();
    assert_eq!(best_a, best_b);
    assert_eq!(trace_a, trace_b);
}

#[test]
fn optimize_bookkeeping_is_exact() {
    let config = small_config();
    let (_, trace) = bwo_optimize(&hashed_fitness, &config, 10).unwrap();
    // |p1| = ceil(0.6 * 12) = 8 every iteration, giving 4 disjoint couples
    // producing 2 offspring each, plus ceil(0.4 * 8) = 4 mutants.
    let p1 = (config.procreation_rate * config.population_size as f64).ceil() as usize;
    let per_iteration =
        2 * config.offspring_pairs_per_mating * (p1 / 2) + (config.mutation_rate * p1 as f64).ceil() as usize;
    let expected = config.population_size + config.max_iterations * per_iteration;
    assert_eq!(trace.evaluations, expected);
    assert!(trace.cache_hits <= trace.evaluations);
    assert_eq!(trace.best_fitness.len(), trace.best_subset.len());
}

#[test]
fn optimize_elitism_holds_on_random_landscapes() {
    for seed in 0..20 {
        let config = BwoConfig {
            seed,
            ..small_config()
        };
        let (best, trace) = bwo_optimize(&hashed_fitness, &config, 10).unwrap();
        assert!(trace.best_fitness.windows(2).all(|w| w[1] >= w[0]), "seed {seed}");
        assert_eq!(*trace.best_fitness.last().unwrap(), best.fitness);
    }
}

#[test]
fn optimize_propagates_fitness_errors_with_context() {
    let failing = |subset: &FeatureSubset| -> Result<f64> {
        if subset.contains(3) {
            Err(Error::EmptyInput)
        } else {
            Ok(0.1)
        }
    };
    let config = BwoConfig {
        population_size: 8,
        max_iterations: 5,
        subset_size: 3,
        ..BwoConfig::default()
    };
    match bwo_optimize(&failing, &config, 6).unwrap_err() {
        Error::Fitness { .. } => {}
        other => panic!("expected a fitness-tagged error, got {other}"),
    }
}

#[test]
fn optimize_stops_early_with_patience() {
    let config = BwoConfig {
        patience: Some(3),
        ..small_config()
    };
    let (_, trace) = bwo_optimize(&constant_fitness, &config, 10).unwrap();
    assert_eq!(trace.best_fitness.len(), 3);
}

#[test]
fn optimize_rejects_bad_configs() {
    let mut config = small_config();
    config.subset_size = 11;
    assert!(bwo_optimize(&constant_fitness, &config, 10).is_err());
    config = small_config();
    config.procreation_rate = 0.0;
    assert!(bwo_optimize(&constant_fitness, &config, 10).is_err());
    config = small_config();
    config.cannibalism_rate = 1.0;
    assert!(bwo_optimize(&constant_fitness, &config, 10).is_err());
}

#[test]
fn trace_csv_shape() {
    let config = BwoConfig {
        max_iterations: 3,
        ..small_config()
    };
    let (_, trace) = bwo_optimize(&hashed_fitness, &config, 10).unwrap();
    let csv = trace.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,best_fitness,best_subset");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
}

fn labeled_by_first_column(rows: usize, cols: usize, seed: u64) -> Dataset<f64> {
    use rand::Rng;
    let mut rng = seeded(seed);
    let features = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(0.0..1.0));
    let labels = features
        .rows()
        .into_iter()
        .map(|r| u8::from(r[0] > 0.5))
        .collect();
    let names = (0..cols).map(|c| format!("f{}", c + 1)).collect();
    Dataset::new(names, features, labels).unwrap()
}

#[test]
fn accuracy_fitness_matches_direct_composition() {
    let data = labeled_by_first_column(120, 4, 20);
    let train_rows: Vec<usize> = (0..90).collect();
    let validation_rows: Vec<usize> = (90..120).collect();
    let subset = FeatureSubset::full(4);
    let config = default_surrogate(5);

    let fitness =
        accuracy_fitness(&data, &train_rows, &validation_rows, &config, &subset).unwrap();

    // Same computation spelled out against the classifiers module directly.
    let mut direct_config = config.clone();
    direct_config.seed = crate::seeding::subset_seed(config.seed, subset.indices());
    let train_part = data.subset_rows(&train_rows).unwrap();
    let validation_part = data.subset_rows(&validation_rows).unwrap();
    let model = crate::classifiers::train(
        &direct_config,
        train_part.features(),
        train_part.labels(),
    )
    .unwrap();
    let predicted = model.predict_labels(validation_part.features()).unwrap();
    let correct = predicted
        .iter()
        .zip(validation_part.labels())
        .filter(|(a, b)| a == b)
        .count();
    assert_eq!(fitness, correct as f64 / validation_rows.len() as f64);
}

#[test]
fn accuracy_fitness_rejects_overlapping_rows() {
    let data = labeled_by_first_column(50, 3, 21);
    let subset = FeatureSubset::full(3);
    let err = accuracy_fitness(
        &data,
        &(0..30).collect::<Vec<_>>(),
        &(25..50).collect::<Vec<_>>(),
        &default_surrogate(0),
        &subset,
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidParam(_)));
}

#[test]
fn accuracy_fitness_prefers_informative_features() {
    let data = labeled_by_first_column(300, 6, 22);
    let rows: Vec<usize> = (0..300).collect();
    let fitness =
        SubsetAccuracy::with_holdout(&data, &rows, 0.25, None, default_surrogate(9), 77).unwrap();
    let informative = fitness
        .evaluate(&FeatureSubset::new(vec![0, 1], 6).unwrap())
        .unwrap();
    let noise = fitness
        .evaluate(&FeatureSubset::new(vec![4, 5], 6).unwrap())
        .unwrap();
    assert!(
        informative > noise,
        "informative {informative} should beat noise {noise}"
    );
    assert!(informative > 0.9);
}

#[test]
fn subset_accuracy_holdout_is_disjoint_stratified_and_capped() {
    let data = labeled_by_first_column(400, 3, 23);
    let rows: Vec<usize> = (0..400).collect();
    let fitness =
        SubsetAccuracy::with_holdout(&data, &rows, 0.25, Some(100), default_surrogate(0), 5)
            .unwrap();
    let train: std::collections::HashSet<usize> = fitness.train_rows().iter().copied().collect();
    assert!(fitness.validation_rows().iter().all(|r| !train.contains(r)));
    let total = fitness.train_rows().len() + fitness.validation_rows().len();
    assert!(total <= 101); // per-class rounding can add one row
    let holdout_share = fitness.validation_rows().len() as f64 / total as f64;
    assert!((holdout_share - 0.25).abs() < 0.05);
    // Both classes present on both sides.
    for rows in [fitness.train_rows(), fitness.validation_rows()] {
        let pos = rows.iter().filter(|&&r| data.labels()[r] == 1).count();
        assert!(pos > 0 && pos < rows.len());
    }
}
