//! k-nearest-neighbors by Euclidean distance; the score is the fraction of
//! class-1 votes among the k nearest reference rows.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    /// Optional stratified cap on the stored reference rows; `None` keeps
    /// the full training set. Large datasets make brute-force scoring
    /// quadratic, so capping is a practical concession for them.
    pub reference_cap: Option<usize>,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 5,
            reference_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel<T: Scalar> {
    pub(crate) reference: Array2<T>,
    pub(crate) labels: Vec<u8>,
    pub(crate) k: usize,
}

pub fn train<T: Scalar>(
    params: &KnnParams,
    seed: u64,
    x: &Array2<T>,
    y: &[u8],
) -> Result<KnnModel<T>> {
    if params.k < 1 {
        return Err(Error::InvalidParam("knn k must be >= 1".into()));
    }
    let rows = match params.reference_cap {
        Some(cap) if cap < x.nrows() => stratified_cap(y, cap, seed),
        _ => (0..x.nrows()).collect::<Vec<_>>(),
    };
    if params.k > rows.len() {
        return Err(Error::KTooLarge {
            k: params.k,
            available: rows.len(),
        });
    }
    Ok(KnnModel {
        reference: x.select(ndarray::Axis(0), &rows),
        labels: rows.iter().map(|&r| y[r]).collect(),
        k: params.k,
    })
}

/// Per-class proportional subsample; indices returned sorted so reference
/// order (and therefore distance tie-breaking) follows the original rows.
fn stratified_cap(y: &[u8], cap: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = y.len();
    let mut picked = Vec::with_capacity(cap);
    for class in [0u8, 1u8] {
        let mut indices: Vec<usize> = (0..n).filter(|&r| y[r] == class).collect();
        let share = ((indices.len() as f64 / n as f64) * cap as f64).round() as usize;
        let take = share.clamp(1, indices.len());
        indices.shuffle(&mut rng);
        picked.extend_from_slice(&indices[..take]);
    }
    picked.sort_unstable();
    picked
}

impl<T: Scalar> KnnModel<T> {
    pub fn n_features(&self) -> usize {
        self.reference.ncols()
    }

    pub fn score_row(&self, row: &[T]) -> T {
        let mut dists: Vec<(T, usize)> = self
            .reference
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let d = r
                    .iter()
                    .zip(row)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum::<T>();
                (d, i)
            })
            .collect();
        let by_distance_then_index = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        };
        dists.select_nth_unstable_by(self.k - 1, by_distance_then_index);
        let votes = dists[..self.k]
            .iter()
            .filter(|&&(_, i)| self.labels[i] == 1)
            .count();
        T::cast(votes as f64 / self.k as f64)
    }

    /// Row-parallel scoring; rows are independent and results are committed
    /// in order, so the output is identical to the sequential path.
    pub fn score_matrix(&self, x: &Array2<T>) -> Vec<T> {
        let rows: Vec<Vec<T>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.score_row(r)).collect()
    }
}
