//! SMOTE oversampling of the minority class.
//!
//! Synthetic rows are linear interpolations between a minority point and one
//! of its k nearest minority neighbors. Original rows are preserved unchanged
//! and in order; synthetic rows are appended. The seeded draw order (parent
//! shuffle once, then neighbor choice and lambda per synthetic row) is part
//! of the determinism contract.

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// SMOTE's free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Minority:majority size ratio after augmentation, in (0, 1].
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::InvalidParam("k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "target_ratio must be in (0,1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// Where a synthetic row came from: row indices into the ORIGINAL matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOrigin<T: Scalar> {
    pub parent: usize,
    pub neighbor: usize,
    pub lambda: T,
}

/// For each point, the indices of its k nearest other points by Euclidean
/// distance; ties broken by lower index. Indices are into `points`.
pub fn minority_neighbors<T: Scalar>(points: &Array2<T>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = points.nrows();
    if n < 2 || k > n - 1 {
        return Err(Error::KTooLarge {
            k,
            available: n.saturating_sub(1),
        });
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "minority points".into(),
        });
    }

    let mut result = Vec::with_capacity(n);
    let mut dists: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        dists.clear();
        let pi = points.row(i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = squared_distance(pi, points.row(j));
            dists.push((d, j));
        }
        let by_distance_then_index = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .expect("distances are finite")
                .then(a.1.cmp(&b.1))
        };
        dists.select_nth_unstable_by(k - 1, by_distance_then_index);
        let mut nearest: Vec<(T, usize)> = dists[..k].to_vec();
        nearest.sort_unstable_by(by_distance_then_index);
        result.push(nearest.into_iter().map(|(_, j)| j).collect());
    }
    Ok(result)
}

fn squared_distance<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

/// SMOTE with per-synthetic-row provenance, for auditing and geometry tests.
#[allow(clippy::type_complexity)]
pub fn smote_oversample_traced<T: Scalar>(
    features: &Array2<T>,
    labels: &[u8],
    config: &SmoteConfig,
) -> Result<(Array2<T>, Vec<u8>, Vec<SynthOrigin<T>>)> {
    config.validate()?;
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.nrows(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    // Tie goes to class 1; with target_ratio <= 1 the deficit is then zero.
    let minority_label = if pos <= neg { 1u8 } else { 0u8 };
    let (minority_count, majority_count) = if minority_label == 1 {
        (pos, neg)
    } else {
        (neg, pos)
    };

    let wanted = (config.target_ratio * majority_count as f64).ceil() as usize;
    let deficit = wanted.saturating_sub(minority_count);
    if deficit == 0 {
        return Ok((features.clone(), labels.to_vec(), Vec::new()));
    }
    if minority_count <= config.k_neighbors {
        return Err(Error::KTooLarge {
            k: config.k_neighbors,
            available: minority_count.saturating_sub(1),
        });
    }

    let minority_rows: Vec<usize> = (0..labels.len())
        .filter(|&r| labels[r] == minority_label)
        .collect();
    let minority_points = features.select(ndarray::Axis(0), &minority_rows);
    let neighbors = minority_neighbors(&minority_points, config.k_neighbors)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut parent_order: Vec<usize> = (0..minority_count).collect();
    parent_order.shuffle(&mut rng);

    let cols = features.ncols();
    let mut out = Array2::zeros((labels.len() + deficit, cols));
    out.slice_mut(ndarray::s![..labels.len(), ..]).assign(features);
    let mut out_labels = labels.to_vec();
    let mut origins = Vec::with_capacity(deficit);

    for s in 0..deficit {
        let p = parent_order[s % minority_count];
        let q = neighbors[p][rng.gen_range(0..config.k_neighbors)];
        let lambda: T = rng.gen_range(T::zero()..=T::one());
        let row = labels.len() + s;
        for c in 0..cols {
            let pv = minority_points[[p, c]];
            let qv = minority_points[[q, c]];
            out[[row, c]] = pv + lambda * (qv - pv);
        }
        out_labels.push(minority_label);
        origins.push(SynthOrigin {
            parent: minority_rows[p],
            neighbor: minority_rows[q],
            lambda,
        });
    }
    Ok((out, out_labels, origins))
}

/// Appends `ceil(target_ratio * majority) - minority` synthetic minority rows.
pub fn smote_oversample<T: Scalar>(
    features: &Array2<T>,
    labels: &[u8],
    config: &SmoteConfig,
) -> Result<(Array2<T>, Vec<u8>)> {
    let (f, l, _) = smote_oversample_traced(features, labels, config)?;
    Ok((f, l))
}
