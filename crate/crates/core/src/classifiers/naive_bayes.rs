//! Gaussian naive Bayes with per-feature likelihoods and a variance floor.

use ndarray::Array2;

use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBayesParams {
    pub variance_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            variance_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel<T: Scalar> {
    pub(crate) log_prior: [T; 2],
    pub(crate) mean: [Vec<T>; 2],
    pub(crate) variance: [Vec<T>; 2],
}

pub fn train<T: Scalar>(
    params: &NaiveBayesParams,
    x: &Array2<T>,
    y: &[u8],
) -> Result<NaiveBayesModel<T>> {
    let f = x.ncols();
    let floor = T::cast(params.variance_floor);
    let mut mean = [vec![T::zero(); f], vec![T::zero(); f]];
    let mut variance = [vec![T::zero(); f], vec![T::zero(); f]];
    let mut count = [T::zero(); 2];

    for (row, &label) in x.rows().into_iter().zip(y) {
        let c = label as usize;
        count[c] += T::one();
        for (j, &v) in row.iter().enumerate() {
            mean[c][j] += v;
        }
    }
    for c in 0..2 {
        for m in mean[c].iter_mut() {
            *m /= count[c];
        }
    }
    for (row, &label) in x.rows().into_iter().zip(y) {
        let c = label as usize;
        for (j, &v) in row.iter().enumerate() {
            let d = v - mean[c][j];
            variance[c][j] += d * d;
        }
    }
    for c in 0..2 {
        for v in variance[c].iter_mut() {
            *v = (*v / count[c]).max(floor);
        }
    }

    let total = count[0] + count[1];
    Ok(NaiveBayesModel {
        log_prior: [(count[0] / total).ln(), (count[1] / total).ln()],
        mean,
        variance,
    })
}

impl<T: Scalar> NaiveBayesModel<T> {
    pub fn n_features(&self) -> usize {
        self.mean[0].len()
    }

    /// Normalized posterior P(class 1 | x) via the log-likelihood difference.
    pub fn score_row(&self, row: &[T]) -> T {
        let two = T::cast(2.0);
        let tau = T::cast(std::f64::consts::TAU);
        let mut log_like = [self.log_prior[0], self.log_prior[1]];
        for c in 0..2 {
            for (j, &v) in row.iter().enumerate() {
                let var = self.variance[c][j];
                let d = v - self.mean[c][j];
                log_like[c] -= ((tau * var).ln() + d * d / var) / two;
            }
        }
        super::sigmoid(log_like[1] - log_like[0])
    }
}
