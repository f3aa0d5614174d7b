//! Black widow optimization over fixed-size feature subsets.
//!
//! A candidate solution is an ordered vector of n distinct feature indices.
//! Each iteration selects the fitter part of the population (p1), mates
//! disjoint random pairs from it with uniform-mask crossover (offspring are
//! repaired back to n distinct indices), culls the worst offspring
//! (cannibalism), mutates a sample of p1, appends everything and truncates
//! back to the population size. The best candidate ever seen is returned
//! together with a per-iteration trace.
//!
//! Crossover is discrete rather than an arithmetic blend: the encoding is
//! integer index vectors, where blending is meaningless; the uniform mask
//! preserves parental genes and the repair step restores distinctness.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{self, ClassifierConfig};
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;

/// Ordered list of distinct feature indices, all in `[0, F)`.
/// Stored zero-based; reports render them one-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    indices: Vec<usize>,
}

impl FeatureSubset {
    pub fn new(indices: Vec<usize>, total_features: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParam("empty feature subset".into()));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= total_features {
                return Err(Error::InvalidParam(format!(
                    "feature index {i} out of range for {total_features} features"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidParam(format!("duplicate feature index {i}")));
            }
        }
        Ok(FeatureSubset { indices })
    }

    /// The full feature set 0..F.
    pub fn full(total_features: usize) -> Self {
        FeatureSubset {
            indices: (0..total_features).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.indices.clone();
        s.sort_unstable();
        s
    }

    /// Sorted one-based indices, the presentation convention for reports.
    pub fn one_based_sorted(&self) -> Vec<usize> {
        self.sorted().into_iter().map(|i| i + 1).collect()
    }

    /// Semicolon-joined one-based rendering, e.g. `1;4;9`.
    pub fn to_one_based_string(&self) -> String {
        self.one_based_sorted()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A scored population member. Ids increase with creation order and break
/// all fitness ties, which makes runs reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub subset: FeatureSubset,
    pub fitness: f64,
    pub id: u64,
}

/// Evolutionary hyperparameters. The defaults follow commonly reported
/// ranges for this optimizer family; every field is configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BwoConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    /// Fraction of the population entering p1, in (0, 1].
    pub procreation_rate: f64,
    /// Fraction of offspring discarded, in [0, 1).
    pub cannibalism_rate: f64,
    /// Fraction of p1 mutated per iteration, in [0, 1].
    pub mutation_rate: f64,
    /// Subset length n.
    pub subset_size: usize,
    pub offspring_pairs_per_mating: usize,
    pub seed: u64,
    /// Early stop after this many iterations without a best-fitness
    /// improvement greater than 1e-9. `None` disables early stopping.
    pub patience: Option<usize>,
}

impl Default for BwoConfig {
    fn default() -> Self {
        BwoConfig {
            population_size: 40,
            max_iterations: 50,
            procreation_rate: 0.6,
            cannibalism_rate: 0.44,
            mutation_rate: 0.4,
            subset_size: 9,
            offspring_pairs_per_mating: 1,
            seed: 0,
            patience: None,
        }
    }
}

const MIN_IMPROVEMENT: f64 = 1e-9;

impl BwoConfig {
    pub fn validate(&self, total_features: usize) -> Result<()> {
        if self.population_size == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParam(
                "population_size and max_iterations must be positive".into(),
            ));
        }
        if self.offspring_pairs_per_mating == 0 {
            return Err(Error::InvalidParam(
                "offspring_pairs_per_mating must be positive".into(),
            ));
        }
        if !(self.procreation_rate > 0.0 && self.procreation_rate <= 1.0) {
            return Err(Error::InvalidParam(
                "procreation_rate must be in (0,1]".into(),
            ));
        }
        if !(self.cannibalism_rate >= 0.0 && self.cannibalism_rate < 1.0) {
            return Err(Error::InvalidParam(
                "cannibalism_rate must be in [0,1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidParam("mutation_rate must be in [0,1]".into()));
        }
        if self.subset_size == 0 || self.subset_size > total_features {
            return Err(Error::InvalidParam(format!(
                "subset_size must be in 1..={total_features}, got {}",
                self.subset_size
            )));
        }
        Ok(())
    }
}

/// Convergence audit: the running best after each iteration, plus exact
/// evaluation bookkeeping. `evaluations` counts candidate scorings;
/// `cache_hits` of them were served by the within-run subset cache instead
/// of a fresh fitness call.
#[derive(Debug, Clone, PartialEq)]
pub struct BwoTrace {
    pub best_fitness: Vec<f64>,
    pub best_subset: Vec<FeatureSubset>,
    pub evaluations: usize,
    pub cache_hits: usize,
}

impl BwoTrace {
    /// `iteration,best_fitness,best_subset` lines; subsets one-based and
    /// semicolon-joined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,best_fitness,best_subset\n");
        for (i, (f, s)) in self.best_fitness.iter().zip(&self.best_subset).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, f, s.to_one_based_string()));
        }
        out
    }
}

/// Deterministic mapping from a subset to a fitness in [0, 1]; higher is
/// better. Must return the same value for the same subset within one run.
pub trait FitnessFunction {
    fn evaluate(&self, subset: &FeatureSubset) -> Result<f64>;
}

impl<F> FitnessFunction for F
where
    F: Fn(&FeatureSubset) -> Result<f64>,
{
    fn evaluate(&self, subset: &FeatureSubset) -> Result<f64> {
        self(subset)
    }
}

/// Uniform random n-subset, in draw order.
fn draw_subset(rng: &mut ChaCha8Rng, total_features: usize, n: usize) -> FeatureSubset {
    FeatureSubset {
        indices: rand::seq::index::sample(rng, total_features, n).into_vec(),
    }
}

/// `population_size` uniformly drawn candidates, each with fitness assigned.
pub fn init_population(
    config: &BwoConfig,
    total_features: usize,
    rng: &mut ChaCha8Rng,
    fitness: &dyn FitnessFunction,
) -> Result<Vec<Candidate>> {
    config.validate(total_features)?;
    let mut population = Vec::with_capacity(config.population_size);
    for id in 0..config.population_size {
        let subset = draw_subset(rng, total_features, config.subset_size);
        let fitness = fitness.evaluate(&subset).map_err(|e| Error::Fitness {
            iteration: 0,
            candidate: id as u64,
            source: Box::new(e),
        })?;
        population.push(Candidate {
            subset,
            fitness,
            id: id as u64,
        });
    }
    Ok(population)
}

fn by_fitness_desc_then_id(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.fitness
        .partial_cmp(&a.fitness)
        .expect("fitness values are finite")
        .then(a.id.cmp(&b.id))
}

/// The top `ceil(rate * population size)` candidates by fitness, ties
/// broken by lower id.
pub fn select_p1(population: &[Candidate], rate: f64) -> Vec<Candidate> {
    let mut sorted: Vec<Candidate> = population.to_vec();
    sorted.sort_by(by_fitness_desc_then_id);
    let count = ((rate * population.len() as f64).ceil() as usize).clamp(1, population.len());
    sorted.truncate(count);
    sorted
}

/// 2 x `pairs` offspring; each pair uses a fresh uniform coordinate mask
/// (child one takes a's index where the mask is set, child two the
/// complement) and each raw child is repaired.
pub fn procreate_pair(
    a: &FeatureSubset,
    b: &FeatureSubset,
    pairs: usize,
    total_features: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<FeatureSubset>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: b.len(),
        });
    }
    let mut children = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let child = |flip: bool| -> Vec<usize> {
            (0..n)
                .map(|i| {
                    if mask[i] != flip {
                        a.indices[i]
                    } else {
                        b.indices[i]
                    }
                })
                .collect()
        };
        children.push(repair(child(false), n, total_features, rng)?);
        children.push(repair(child(true), n, total_features, rng)?);
    }
    Ok(children)
}

/// Removes duplicate indices (first occurrence kept) and fills the deficit
/// with uniform draws from the indices absent from the child.
pub fn repair(
    raw: Vec<usize>,
    n: usize,
    total_features: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FeatureSubset> {
    if n > total_features {
        return Err(Error::InvalidParam(format!(
            "cannot build a {n}-subset of {total_features} features"
        )));
    }
    let mut present = vec![false; total_features];
    let mut kept = Vec::with_capacity(n);
    for i in raw {
        if i >= total_features {
            return Err(Error::InvalidParam(format!(
                "feature index {i} out of range for {total_features} features"
            )));
        }
        if !present[i] {
            present[i] = true;
            kept.push(i);
        }
    }
    if kept.len() < n {
        let absent: Vec<usize> = (0..total_features).filter(|&i| !present[i]).collect();
        let deficit = n - kept.len();
        let picks = rand::seq::index::sample(rng, absent.len(), deficit);
        kept.extend(picks.iter().map(|p| absent[p]));
    }
    kept.truncate(n);
    Ok(FeatureSubset { indices: kept })
}

/// Sorts by fitness (descending, ties by lower id) and removes the worst
/// `floor(rate * count)`; survivors are returned in sorted order.
pub fn cannibalize(candidates: Vec<Candidate>, rate: f64) -> Vec<Candidate> {
    let mut sorted = candidates;
    sorted.sort_by(by_fitness_desc_then_id);
    let removed = (rate * sorted.len() as f64).floor() as usize;
    sorted.truncate(sorted.len() - removed.min(sorted.len()));
    sorted
}

/// Replaces one uniformly chosen position with a uniformly chosen index not
/// currently in the subset. When the subset already spans every feature
/// there is nothing to swap in, so the subset is returned unchanged.
pub fn mutate(
    subset: &FeatureSubset,
    total_features: usize,
    rng: &mut ChaCha8Rng,
) -> FeatureSubset {
    let n = subset.len();
    if n == total_features {
        return subset.clone();
    }
    let position = rng.gen_range(0..n);
    let absent: Vec<usize> = (0..total_features)
        .filter(|&i| !subset.contains(i))
        .collect();
    let replacement = absent[rng.gen_range(0..absent.len())];
    let mut indices = subset.indices.clone();
    indices[position] = replacement;
    FeatureSubset { indices }
}

/// Caching adapter: identical subsets recur across iterations, so fitness
/// values are cached by sorted index key. Counts every scoring.
struct CachingFitness<'a> {
    inner: &'a dyn FitnessFunction,
    cache: std::cell::RefCell<HashMap<Vec<usize>, f64>>,
    evaluations: std::cell::Cell<usize>,
    cache_hits: std::cell::Cell<usize>,
}

impl<'a> CachingFitness<'a> {
    fn new(inner: &'a dyn FitnessFunction) -> Self {
        CachingFitness {
            inner,
            cache: std::cell::RefCell::new(HashMap::new()),
            evaluations: std::cell::Cell::new(0),
            cache_hits: std::cell::Cell::new(0),
        }
    }
}

impl FitnessFunction for CachingFitness<'_> {
    fn evaluate(&self, subset: &FeatureSubset) -> Result<f64> {
        self.evaluations.set(self.evaluations.get() + 1);
        let key = subset.sorted();
        if let Some(&fitness) = self.cache.borrow().get(&key) {
            self.cache_hits.set(self.cache_hits.get() + 1);
            return Ok(fitness);
        }
        let fitness = self.inner.evaluate(subset)?;
        if !(0.0..=1.0).contains(&fitness) {
            return Err(Error::InvalidParam(format!(
                "fitness {fitness} outside [0,1]"
            )));
        }
        self.cache.borrow_mut().insert(key, fitness);
        Ok(fitness)
    }
}

/// Runs the optimizer and returns the best candidate ever seen plus the
/// iteration trace. The entire run is a pure function of
/// (fitness, config, total_features).
pub fn bwo_optimize(
    fitness: &dyn FitnessFunction,
    config: &BwoConfig,
    total_features: usize,
) -> Result<(Candidate, BwoTrace)> {
    config.validate(total_features)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cached = CachingFitness::new(fitness);

    let mut population = init_population(config, total_features, &mut rng, &cached)?;
    let mut next_id = population.len() as u64;
    population.sort_by(by_fitness_desc_then_id);
    let mut best = population[0].clone();

    let mut trace = BwoTrace {
        best_fitness: Vec::with_capacity(config.max_iterations),
        best_subset: Vec::with_capacity(config.max_iterations),
        evaluations: 0,
        cache_hits: 0,
    };
    let mut stale_iterations = 0usize;

    for iteration in 1..=config.max_iterations {
        let p1 = select_p1(&population, config.procreation_rate);

        // Disjoint random pairs from p1.
        let mut order: Vec<usize> = (0..p1.len()).collect();
        order.shuffle(&mut rng);

        let score = |subset: FeatureSubset, counter: &mut u64| -> Result<Candidate> {
            let id = *counter;
            *counter += 1;
            let fitness = cached.evaluate(&subset).map_err(|e| Error::Fitness {
                iteration,
                candidate: id,
                source: Box::new(e),
            })?;
            Ok(Candidate {
                subset,
                fitness,
                id,
            })
        };

        let mut offspring = Vec::new();
        for couple in order.chunks_exact(2) {
            let children = procreate_pair(
                &p1[couple[0]].subset,
                &p1[couple[1]].subset,
                config.offspring_pairs_per_mating,
                total_features,
                &mut rng,
            )?;
            for child in children {
                offspring.push(score(child, &mut next_id)?);
            }
        }
        let p2 = cannibalize(offspring, config.cannibalism_rate);

        let mutant_count = (config.mutation_rate * p1.len() as f64).ceil() as usize;
        let chosen = rand::seq::index::sample(&mut rng, p1.len(), mutant_count.min(p1.len()));
        let mut p3 = Vec::with_capacity(mutant_count);
        for member in chosen.iter() {
            let mutated = mutate(&p1[member].subset, total_features, &mut rng);
            p3.push(score(mutated, &mut next_id)?);
        }

        population.extend(p2);
        population.extend(p3);
        population.sort_by(by_fitness_desc_then_id);
        population.truncate(config.population_size);

        let improvement = population[0].fitness - best.fitness;
        if improvement > 0.0 {
            best = population[0].clone();
        }
        trace.best_fitness.push(best.fitness);
        trace.best_subset.push(best.subset.clone());

        if let Some(patience) = config.patience {
            if improvement > MIN_IMPROVEMENT {
                stale_iterations = 0;
            } else {
                stale_iterations += 1;
                if stale_iterations >= patience {
                    break;
                }
            }
        }
    }

    trace.evaluations = cached.evaluations.get();
    trace.cache_hits = cached.cache_hits.get();
    Ok((best, trace))
}

/// Classifier-accuracy fitness: trains the configured surrogate on the
/// training rows restricted to the subset's columns and returns accuracy on
/// the validation rows. The surrogate's seed is derived from the subset, so
/// each subset's evaluation is individually reproducible.
pub fn accuracy_fitness<T: Scalar>(
    data: &Dataset<T>,
    train_rows: &[usize],
    validation_rows: &[usize],
    config: &ClassifierConfig,
    subset: &FeatureSubset,
) -> Result<f64> {
    let train_set: HashSet<usize> = train_rows.iter().copied().collect();
    if validation_rows.iter().any(|r| train_set.contains(r)) {
        return Err(Error::InvalidParam(
            "train and validation rows overlap".into(),
        ));
    }
    if validation_rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let columns = data.subset_columns(subset.indices())?;
    let train_data = columns.subset_rows(train_rows)?;
    let validation = columns.subset_rows(validation_rows)?;

    let mut surrogate = config.clone();
    surrogate.seed = seeding::subset_seed(config.seed, subset.indices());
    let model = classifiers::train(&surrogate, train_data.features(), train_data.labels())?;
    let predicted = model.predict_labels(validation.features())?;
    let correct = predicted
        .iter()
        .zip(validation.labels())
        .filter(|(a, b)| a == b)
        .count();
    Ok(correct as f64 / validation_rows.len() as f64)
}

/// Default surrogate for wrapper feature selection: a shallow decision tree
/// is fast, parameter-light and scale-invariant.
pub fn default_surrogate(seed: u64) -> ClassifierConfig {
    let mut config = ClassifierConfig::new(crate::classifiers::ClassifierKind::DecisionTree);
    config.tree.max_depth = 8;
    config.seed = seed;
    config
}

/// Wrapper-selection fitness over a fixed train/validation carve-out of the
/// supplied rows.
pub struct SubsetAccuracy<'a, T: Scalar> {
    data: &'a Dataset<T>,
    train_rows: Vec<usize>,
    validation_rows: Vec<usize>,
    config: ClassifierConfig,
}

impl<'a, T: Scalar> SubsetAccuracy<'a, T> {
    /// Carves a stratified holdout (`holdout_fraction`, e.g. 0.25) out of a
    /// stratified subsample of at most `cap` of the given rows. The carve is
    /// fixed once per optimizer run so fitness stays deterministic per
    /// subset.
    pub fn with_holdout(
        data: &'a Dataset<T>,
        rows: &[usize],
        holdout_fraction: f64,
        cap: Option<usize>,
        config: ClassifierConfig,
        seed: u64,
    ) -> Result<Self> {
        if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
            return Err(Error::InvalidParam(
                "holdout_fraction must be in (0,1)".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train_rows = Vec::new();
        let mut validation_rows = Vec::new();
        for class in [0u8, 1u8] {
            let mut class_rows: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| data.labels()[r] == class)
                .collect();
            if class_rows.is_empty() {
                return Err(Error::SingleClass);
            }
            class_rows.shuffle(&mut rng);
            // Apply the subsample cap proportionally per class.
            if let Some(cap) = cap {
                let share =
                    ((class_rows.len() as f64 / rows.len() as f64) * cap as f64).round() as usize;
                class_rows.truncate(share.max(2).min(class_rows.len()));
            }
            let holdout = ((class_rows.len() as f64 * holdout_fraction).round() as usize)
                .clamp(1, class_rows.len() - 1);
            validation_rows.extend_from_slice(&class_rows[..holdout]);
            train_rows.extend_from_slice(&class_rows[holdout..]);
        }
        train_rows.sort_unstable();
        validation_rows.sort_unstable();
        Ok(SubsetAccuracy {
            data,
            train_rows,
            validation_rows,
            config,
        })
    }

    pub fn train_rows(&self) -> &[usize] {
        &self.train_rows
    }

    pub fn validation_rows(&self) -> &[usize] {
        &self.validation_rows
    }
}

impl<T: Scalar> FitnessFunction for SubsetAccuracy<'_, T> {
    fn evaluate(&self, subset: &FeatureSubset) -> Result<f64> {
        accuracy_fitness(
            self.data,
            &self.train_rows,
            &self.validation_rows,
            &self.config,
            subset,
        )
    }
}

#[cfg(test)]
mod tests;
