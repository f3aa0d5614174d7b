//! Confusion-matrix metrics, ROC curves and AUC for binary classifiers.
//!
//! The positive class is label 1. All derived metrics are computed in `f64`
//! from integer counts; any metric whose denominator is zero is reported as
//! `0.0` with its `*_undefined` flag set instead of propagating a NaN.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tallies of the four truth/prediction combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// All count-derived metrics plus flags marking zero-denominator substitutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub mcc: f64,
    pub sensitivity_undefined: bool,
    pub specificity_undefined: bool,
    pub precision_undefined: bool,
    pub f1_undefined: bool,
    pub mcc_undefined: bool,
}

impl MetricsReport {
    /// Flat JSON rendering, one key per field.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("MetricsReport serializes")
    }
}

/// Counts truth/prediction combinations. Positive class is 1.
pub fn confusion(truth: &[u8], predicted: &[u8]) -> Result<ConfusionCounts> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => {
                return Err(Error::InvalidParam(format!(
                    "labels must be 0 or 1, found truth={t} predicted={p}"
                )))
            }
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize, undefined: &mut bool) -> f64 {
    if den == 0 {
        *undefined = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Derives accuracy, sensitivity, specificity, precision, F1 and MCC from counts.
pub fn compute_metrics(c: &ConfusionCounts) -> Result<MetricsReport> {
    let total = c.total();
    if total == 0 {
        return Err(Error::AllZeroCounts);
    }
    let mut sensitivity_undefined = false;
    let mut specificity_undefined = false;
    let mut precision_undefined = false;
    let mut f1_undefined = false;
    let mut mcc_undefined = false;

    let accuracy = (c.tp + c.tn) as f64 / total as f64;
    let sensitivity = ratio(c.tp, c.tp + c.fn_, &mut sensitivity_undefined);
    let specificity = ratio(c.tn, c.tn + c.fp, &mut specificity_undefined);
    let precision = ratio(c.tp, c.tp + c.fp, &mut precision_undefined);
    let f1 = ratio(2 * c.tp, 2 * c.tp + c.fn_ + c.fp, &mut f1_undefined);

    let mcc = {
        let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
        let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if den == 0.0 {
            mcc_undefined = true;
            0.0
        } else {
            (tp * tn - fp * fn_) / den.sqrt()
        }
    };

    Ok(MetricsReport {
        accuracy,
        sensitivity,
        specificity,
        precision,
        f1,
        mcc,
        sensitivity_undefined,
        specificity_undefined,
        precision_undefined,
        f1_undefined,
        mcc_undefined,
    })
}

/// ROC curve as (FPR, TPR) points from (0,0) to (1,1), both coordinates
/// non-decreasing. Tied scores are processed as one atomic step.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Validates monotonicity and exact endpoints.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParam(
                "an ROC curve needs at least the two endpoints".into(),
            ));
        }
        if *points.first().unwrap() != (0.0, 0.0) || *points.last().unwrap() != (1.0, 1.0) {
            return Err(Error::InvalidParam(
                "ROC curve must start at (0,0) and end at (1,1)".into(),
            ));
        }
        for w in points.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidParam(
                    "ROC curve coordinates must be non-decreasing".into(),
                ));
            }
        }
        Ok(RocCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Two-column comma-separated text with an `fpr,tpr` header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }
}

/// Builds the ROC curve by sweeping scores in descending order.
///
/// One point is appended after each group of tied scores, so the curve does
/// not depend on the ordering of rows within a tie group.
pub fn roc_curve<T: Scalar>(truth: &[u8], scores: &[T]) -> Result<RocCurve> {
    if truth.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            what: "scores".into(),
        });
    }
    let pos = truth.iter().filter(|&&t| t == 1).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });

    let mut points = Vec::with_capacity(truth.len() + 2);
    points.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if truth[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        i = j;
    }
    debug_assert_eq!(*points.last().unwrap(), (1.0, 1.0));
    RocCurve::from_points(points)
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for w in curve.points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    area
}
