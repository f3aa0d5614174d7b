//! CART decision tree: Gini impurity, threshold splits at midpoints of
//! sorted distinct values, leaves holding the class-1 fraction.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 12,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node<T: Scalar> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        prob: T,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel<T: Scalar> {
    pub(crate) nodes: Vec<Node<T>>,
    pub(crate) n_features: usize,
}

impl<T: Scalar> TreeModel<T> {
    #[cfg(test)]
    pub(crate) fn leaf(prob: T, n_features: usize) -> Self {
        TreeModel {
            nodes: vec![Node::Leaf { prob }],
            n_features,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Class-1 fraction of the leaf the row falls into.
    pub fn score_row(&self, row: &[T]) -> T {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { prob } => return prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Grows a tree on the given rows. `features_per_split` draws that many
/// candidate features per node from `rng` (used by the forest); `None`
/// considers every feature.
pub(crate) struct TreeGrower<'a, T: Scalar> {
    pub x: &'a Array2<T>,
    pub y: &'a [u8],
    pub params: TreeParams,
    pub features_per_split: Option<usize>,
    pub rng: Option<ChaCha8Rng>,
}

impl<'a, T: Scalar> TreeGrower<'a, T> {
    pub fn grow(mut self, rows: Vec<usize>) -> TreeModel<T> {
        let mut nodes = Vec::new();
        self.build(rows, 0, &mut nodes);
        TreeModel {
            nodes,
            n_features: self.x.ncols(),
        }
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node<T>>) -> usize {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let prob = T::cast(pos as f64 / n as f64);

        let stop = depth >= self.params.max_depth
            || n < self.params.min_samples_split
            || pos == 0
            || pos == n;
        if !stop {
            if let Some((feature, threshold)) = self.best_split(&rows, pos) {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&r| self.x[[r, feature]] <= threshold);
                let at = nodes.len();
                nodes.push(Node::Leaf { prob }); // placeholder
                let left = self.build(left_rows, depth + 1, nodes);
                let right = self.build(right_rows, depth + 1, nodes);
                nodes[at] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                return at;
            }
        }
        nodes.push(Node::Leaf { prob });
        nodes.len() - 1
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let f = self.x.ncols();
        match (self.features_per_split, self.rng.as_mut()) {
            (Some(m), Some(rng)) if m < f => {
                let mut picked = rand::seq::index::sample(rng, f, m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..f).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize], pos: usize) -> Option<(usize, T)> {
        let n = rows.len();
        let parent = gini(pos, n - pos);
        let mut best: Option<(f64, usize, T)> = None;
        let mut column: Vec<(T, u8)> = Vec::with_capacity(n);

        for feature in self.candidate_features() {
            column.clear();
            column.extend(
                rows.iter()
                    .map(|&r| (self.x[[r, feature]], self.y[r])),
            );
            column.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

            let mut pos_left = 0usize;
            for i in 0..n - 1 {
                pos_left += column[i].1 as usize;
                if column[i].0 == column[i + 1].0 {
                    continue;
                }
                let n_left = i + 1;
                let n_right = n - n_left;
                let pos_right = pos - pos_left;
                let weighted = (n_left as f64 * gini(pos_left, n_left - pos_left)
                    + n_right as f64 * gini(pos_right, n_right - pos_right))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 0.0 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, midpoint(column[i].0, column[i + 1].0)));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}

fn gini(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos as f64 / n;
    let q = neg as f64 / n;
    1.0 - p * p - q * q
}

/// Midpoint between adjacent distinct values, nudged down to `lo` when
/// rounding would land it at or above `hi` (so `x <= t` always separates).
fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let two = T::cast(2.0);
    let mid = lo / two + hi / two;
    if mid.is_finite() && mid < hi {
        mid
    } else {
        lo
    }
}

pub fn train<T: Scalar>(params: &TreeParams, x: &Array2<T>, y: &[u8]) -> Result<TreeModel<T>> {
    let grower = TreeGrower {
        x,
        y,
        params: *params,
        features_per_split: None,
        rng: None,
    };
    Ok(grower.grow((0..x.nrows()).collect()))
}

/// Seeded variant used by the random forest.
pub(crate) fn train_sampled<T: Scalar>(
    params: &TreeParams,
    x: &Array2<T>,
    y: &[u8],
    rows: Vec<usize>,
    features_per_split: usize,
    seed: u64,
) -> TreeModel<T> {
    let grower = TreeGrower {
        x,
        y,
        params: *params,
        features_per_split: Some(features_per_split),
        rng: Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    grower.grow(rows)
}
