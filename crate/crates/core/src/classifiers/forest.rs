//! Random forest: bagged CART trees with sqrt-of-features sampling per
//! split; the score is the fraction of trees voting class 1.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::seeding;

use super::tree::{self, TreeModel, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T: Scalar> {
    pub(crate) trees: Vec<TreeModel<T>>,
}

pub fn train<T: Scalar>(
    params: &ForestParams,
    seed: u64,
    x: &Array2<T>,
    y: &[u8],
) -> Result<ForestModel<T>> {
    let n = x.nrows();
    let features_per_split = ((x.ncols() as f64).sqrt().floor() as usize).max(1);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        // Per-tree seed: bootstrap and split sampling are independent streams.
        let tree_seed = seeding::derive(seed, t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        trees.push(tree::train_sampled(
            &tree_params,
            x,
            y,
            rows,
            features_per_split,
            seeding::derive(tree_seed, 1),
        ));
    }
    Ok(ForestModel { trees })
}

impl<T: Scalar> ForestModel<T> {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    /// Fraction of trees whose leaf majority is class 1.
    pub fn score_row(&self, row: &[T]) -> T {
        let half = T::cast(0.5);
        let votes = self
            .trees
            .iter()
            .filter(|t| t.score_row(row) >= half)
            .count();
        T::cast(votes as f64 / self.trees.len() as f64)
    }
}
