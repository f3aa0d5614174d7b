//! One-hidden-layer perceptron with logistic activations throughout,
//! trained by per-sample stochastic gradient descent on the log-loss.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 32,
            learning_rate: 0.1,
            epochs: 50,
        }
    }
}

/// Weights of the network; also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights<T: Scalar> {
    /// hidden x features
    pub w1: Array2<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: T,
}

impl<T: Scalar> MlpWeights<T> {
    fn zeros(hidden: usize, features: usize) -> Self {
        MlpWeights {
            w1: Array2::zeros((hidden, features)),
            b1: vec![T::zero(); hidden],
            w2: vec![T::zero(); hidden],
            b2: T::zero(),
        }
    }

    /// Uniform +-0.5 initialization; draw order is w1 row-major, b1, w2, b2.
    fn init(hidden: usize, features: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = T::cast(0.5);
        let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-half..=half);
        let w1 = Array2::from_shape_fn((hidden, features), |_| draw(&mut rng));
        let b1 = (0..hidden).map(|_| draw(&mut rng)).collect();
        let w2 = (0..hidden).map(|_| draw(&mut rng)).collect();
        let b2 = draw(&mut rng);
        MlpWeights { w1, b1, w2, b2 }
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    pub fn n_features(&self) -> usize {
        self.w1.ncols()
    }

    /// Flat parameter vector (w1 row-major, b1, w2, b2), for gradient checks.
    pub fn flatten(&self) -> Vec<T> {
        let mut out: Vec<T> = self.w1.iter().copied().collect();
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    /// Inverse of [`MlpWeights::flatten`] with this weight set's shapes.
    pub fn unflatten(&self, flat: &[T]) -> MlpWeights<T> {
        let (h, f) = (self.hidden(), self.n_features());
        assert_eq!(flat.len(), h * f + h + h + 1, "flat parameter count");
        let w1 = Array2::from_shape_vec((h, f), flat[..h * f].to_vec()).unwrap();
        let b1 = flat[h * f..h * f + h].to_vec();
        let w2 = flat[h * f + h..h * f + 2 * h].to_vec();
        MlpWeights {
            w1,
            b1,
            w2,
            b2: flat[h * f + 2 * h],
        }
    }

    fn forward(&self, row: &[T]) -> (Vec<T>, T) {
        let hidden: Vec<T> = self
            .w1
            .rows()
            .into_iter()
            .zip(&self.b1)
            .map(|(w, &b)| {
                super::sigmoid(w.iter().zip(row).fold(b, |acc, (&wi, &xi)| acc + wi * xi))
            })
            .collect();
        let out = super::sigmoid(
            self.w2
                .iter()
                .zip(&hidden)
                .fold(self.b2, |acc, (&w, &h)| acc + w * h),
        );
        (hidden, out)
    }

    fn is_finite(&self) -> bool {
        self.b2.is_finite()
            && self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
    }
}

/// Mean log-loss over the batch and its backpropagated gradient.
/// Exposed so the gradient can be compared against finite differences.
pub fn loss_and_gradient<T: Scalar>(
    weights: &MlpWeights<T>,
    x: &Array2<T>,
    y: &[u8],
) -> (T, MlpWeights<T>) {
    let n = T::cast(x.nrows() as f64);
    let eps = T::cast(1e-12);
    let mut loss = T::zero();
    let mut grad = MlpWeights::zeros(weights.hidden(), weights.n_features());

    for (row, &label) in x.rows().into_iter().zip(y) {
        let row = row.as_slice().expect("contiguous row");
        let (hidden, out) = weights.forward(row);
        let target = T::cast(label as f64);
        let p = out.max(eps).min(T::one() - eps);
        loss -= target * p.ln() + (T::one() - target) * (T::one() - p).ln();

        let delta_out = out - target; // d loss / d pre-activation of output
        grad.b2 += delta_out;
        for (g, &h) in grad.w2.iter_mut().zip(&hidden) {
            *g += delta_out * h;
        }
        for j in 0..weights.hidden() {
            let delta_h = delta_out * weights.w2[j] * hidden[j] * (T::one() - hidden[j]);
            grad.b1[j] += delta_h;
            for (g, &xi) in grad.w1.row_mut(j).iter_mut().zip(row) {
                *g += delta_h * xi;
            }
        }
    }

    loss /= n;
    grad.b2 /= n;
    grad.w1.mapv_inplace(|g| g / n);
    for g in grad.b1.iter_mut().chain(grad.w2.iter_mut()) {
        *g /= n;
    }
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T: Scalar> {
    pub(crate) weights: MlpWeights<T>,
}

pub fn train<T: Scalar>(
    params: &MlpParams,
    seed: u64,
    x: &Array2<T>,
    y: &[u8],
) -> Result<MlpModel<T>> {
    let rate = T::cast(params.learning_rate);
    let mut weights: MlpWeights<T> = MlpWeights::init(params.hidden, x.ncols(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seeding::derive(seed, 1));
    let mut order: Vec<usize> = (0..x.nrows()).collect();

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let row = x.row(i);
            let row = row.as_slice().expect("contiguous row");
            let (hidden, out) = weights.forward(row);
            let target = T::cast(y[i] as f64);
            let delta_out = out - target;

            for j in 0..params.hidden {
                let delta_h = delta_out * weights.w2[j] * hidden[j] * (T::one() - hidden[j]);
                weights.w2[j] -= rate * delta_out * hidden[j];
                weights.b1[j] -= rate * delta_h;
                for (w, &xi) in weights.w1.row_mut(j).iter_mut().zip(row) {
                    *w -= rate * delta_h * xi;
                }
            }
            weights.b2 -= rate * delta_out;
        }
        if !weights.is_finite() {
            return Err(Error::Divergence { kind: "mlp" });
        }
    }
    Ok(MlpModel { weights })
}

impl<T: Scalar> MlpModel<T> {
    pub fn n_features(&self) -> usize {
        self.weights.n_features()
    }

    pub fn weights(&self) -> &MlpWeights<T> {
        &self.weights
    }

    pub fn score_row(&self, row: &[T]) -> T {
        self.weights.forward(row).1
    }
}
