//! AdaBoost over depth-1 stumps with the standard exponential-loss weight
//! update. A round with weighted error >= 0.5 stops boosting; a perfect
//! round keeps its stump with a capped vote and then stops.

use ndarray::Array2;

use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaBoostParams {
    pub rounds: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams { rounds: 100 }
    }
}

/// `polarity = +1` votes class 1 when `x[feature] <= threshold`,
/// `polarity = -1` votes class 1 on the other side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump<T: Scalar> {
    pub(crate) feature: usize,
    pub(crate) threshold: T,
    pub(crate) polarity: i8,
    pub(crate) alpha: T,
}

impl<T: Scalar> Stump<T> {
    fn vote(&self, row: &[T]) -> T {
        let on_left = row[self.feature] <= self.threshold;
        
        if on_left == (self.polarity == 1) {
            T::one()
        } else {
            -T::one()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostModel<T: Scalar> {
    pub(crate) stumps: Vec<Stump<T>>,
    /// Training class-1 fraction, scored when no usable stump was found.
    pub(crate) fallback_prior: T,
    pub(crate) n_features: usize,
}

// Weighted error below this counts as a perfect round.
const PERFECT_EPS: f64 = 1e-12;

pub fn train<T: Scalar>(
    params: &AdaBoostParams,
    x: &Array2<T>,
    y: &[u8],
) -> Result<AdaBoostModel<T>> {
    let n = x.nrows();
    let f = x.ncols();
    let signed: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    // Columns sorted once; re-used every round since only weights change.
    let sorted: Vec<Vec<usize>> = (0..f)
        .map(|c| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_unstable_by(|&a, &b| {
                x[[a, c]]
                    .partial_cmp(&x[[b, c]])
                    .expect("finite features")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps: Vec<Stump<T>> = Vec::new();

    for _ in 0..params.rounds {
        let Some((err, stump)) = best_stump(x, &signed, &weights, &sorted) else {
            break; // every feature constant
        };
        if err >= 0.5 {
            break;
        }
        let clamped = err.max(PERFECT_EPS);
        let alpha = 0.5 * ((1.0 - clamped) / clamped).ln();
        let stump = Stump {
            alpha: T::cast(alpha),
            ..stump
        };
        for (i, w) in weights.iter_mut().enumerate() {
            let row = x.row(i);
            let h = stump.vote(row.as_slice().expect("contiguous row")).as_f64();
            *w *= (-alpha * signed[i] * h).exp();
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        stumps.push(stump);
        if err <= PERFECT_EPS {
            break;
        }
    }

    let pos = y.iter().filter(|&&l| l == 1).count();
    Ok(AdaBoostModel {
        stumps,
        fallback_prior: T::cast(pos as f64 / n as f64),
        n_features: f,
    })
}

/// Scans every midpoint threshold of every feature and returns the stump
/// with minimum weighted error. Ties keep the first candidate in
/// (feature, threshold, polarity +1 before -1) order.
fn best_stump<T: Scalar>(
    x: &Array2<T>,
    signed: &[f64],
    weights: &[f64],
    sorted: &[Vec<usize>],
) -> Option<(f64, Stump<T>)> {
    let total_pos: f64 = weights
        .iter()
        .zip(signed)
        .filter(|&(_, &s)| s > 0.0)
        .map(|(w, _)| w)
        .sum();
    let total_neg: f64 = 1.0 - total_pos;

    let mut best: Option<(f64, Stump<T>)> = None;
    for (feature, order) in sorted.iter().enumerate() {
        let mut pos_left = 0.0f64;
        let mut neg_left = 0.0f64;
        for w in order.windows(2) {
            let (i, j) = (w[0], w[1]);
            if signed[i] > 0.0 {
                pos_left += weights[i];
            } else {
                neg_left += weights[i];
            }
            let (lo, hi) = (x[[i, feature]], x[[j, feature]]);
            if lo == hi {
                continue;
            }
            // polarity +1: class 1 on the left. Errors: negatives on the
            // left plus positives on the right.
            let err_plus = neg_left + (total_pos - pos_left);
            for (err, polarity) in [(err_plus, 1i8), (1.0 - err_plus, -1i8)] {
                if best.as_ref().is_none_or(|&(b, _)| err < b) {
                    best = Some((
                        err,
                        Stump {
                            feature,
                            threshold: midpoint(lo, hi),
                            polarity,
                            alpha: T::zero(),
                        },
                    ));
                }
            }
        }
    }
    // err_plus + err_minus = total_pos + total_neg = 1 by construction.
    let _ = total_neg;
    best
}

fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let two = T::cast(2.0);
    let mid = lo / two + hi / two;
    if mid.is_finite() && mid < hi {
        mid
    } else {
        lo
    }
}

impl<T: Scalar> AdaBoostModel<T> {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Logistic squash of the weighted stump sum.
    pub fn score_row(&self, row: &[T]) -> T {
        if self.stumps.is_empty() {
            return self.fallback_prior;
        }
        let sum = self
            .stumps
            .iter()
            .fold(T::zero(), |acc, s| acc + s.alpha * s.vote(row));
        super::sigmoid(sum)
    }
}
