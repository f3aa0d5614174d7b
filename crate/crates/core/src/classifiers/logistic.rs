//! Logistic regression trained by full-batch gradient descent on the
//! mean log-loss, starting from zero parameters.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 500,
        }
    }
}

/// P(y=1 | x) = exp(bias + weights.x) / (1 + exp(bias + weights.x)).
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel<T: Scalar> {
    pub bias: T,
    pub weights: Vec<T>,
}

impl<T: Scalar> LogisticModel<T> {
    pub fn score_row(&self, row: &[T]) -> T {
        let z = self
            .weights
            .iter()
            .zip(row)
            .fold(self.bias, |acc, (&w, &v)| acc + w * v);
        super::sigmoid(z)
    }
}

/// Mean log-loss over the batch and its gradient with respect to
/// (bias, weights). Exposed so the analytic gradient can be compared
/// against finite differences.
pub fn loss_and_gradient<T: Scalar>(
    bias: T,
    weights: &[T],
    x: &Array2<T>,
    y: &[u8],
) -> (T, T, Vec<T>) {
    let n = T::cast(x.nrows() as f64);
    let eps = T::cast(1e-12);
    let mut loss = T::zero();
    let mut grad_bias = T::zero();
    let mut grad_w = vec![T::zero(); weights.len()];
    for (row, &label) in x.rows().into_iter().zip(y) {
        let z = weights
            .iter()
            .zip(row.iter())
            .fold(bias, |acc, (&w, &v)| acc + w * v);
        let p = super::sigmoid(z);
        let target = T::cast(label as f64);
        let p_clamped = p.max(eps).min(T::one() - eps);
        loss -= target * p_clamped.ln() + (T::one() - target) * (T::one() - p_clamped).ln();
        let residual = p - target;
        grad_bias += residual;
        for (g, &v) in grad_w.iter_mut().zip(row.iter()) {
            *g += residual * v;
        }
    }
    loss /= n;
    grad_bias /= n;
    for g in grad_w.iter_mut() {
        *g /= n;
    }
    (loss, grad_bias, grad_w)
}

pub fn train<T: Scalar>(
    params: &LogisticParams,
    x: &Array2<T>,
    y: &[u8],
) -> Result<LogisticModel<T>> {
    let rate = T::cast(params.learning_rate);
    let mut bias = T::zero();
    let mut weights = vec![T::zero(); x.ncols()];
    for _ in 0..params.epochs {
        let (_, grad_bias, grad_w) = loss_and_gradient(bias, &weights, x, y);
        bias -= rate * grad_bias;
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= rate * *g;
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence {
                kind: "logistic_regression",
            });
        }
    }
    Ok(LogisticModel { bias, weights })
}
