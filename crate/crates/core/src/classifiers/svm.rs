//! Linear SVM: hinge loss with L2 regularization, trained by stochastic
//! subgradient descent on a 1/(lambda*t) step schedule. The bias is
//! unregularized. Scores are the logistic squash of the signed margin.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-4,
            epochs: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T: Scalar> {
    pub(crate) weights: Vec<T>,
    pub(crate) bias: T,
}

pub fn train<T: Scalar>(
    params: &SvmParams,
    seed: u64,
    x: &Array2<T>,
    y: &[u8],
) -> Result<SvmModel<T>> {
    let lambda = T::cast(params.lambda);
    let mut weights = vec![T::zero(); x.ncols()];
    let mut bias = T::zero();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut t = 0u64;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = T::one() / (lambda * T::cast(t as f64));
            let row = x.row(i);
            let signed = if y[i] == 1 { T::one() } else { -T::one() };
            let margin = signed
                * row
                    .iter()
                    .zip(&weights)
                    .fold(bias, |acc, (&v, &w)| acc + w * v);
            let shrink = T::one() - eta * lambda;
            if margin < T::one() {
                for (w, &v) in weights.iter_mut().zip(row.iter()) {
                    *w = shrink * *w + eta * signed * v;
                }
                bias += eta * signed;
            } else {
                for w in weights.iter_mut() {
                    *w = shrink * *w;
                }
            }
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { kind: "linear_svm" });
        }
    }
    Ok(SvmModel { weights, bias })
}

impl<T: Scalar> SvmModel<T> {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn score_row(&self, row: &[T]) -> T {
        let margin = self
            .weights
            .iter()
            .zip(row)
            .fold(self.bias, |acc, (&w, &v)| acc + w * v);
        super::sigmoid(margin)
    }
}
