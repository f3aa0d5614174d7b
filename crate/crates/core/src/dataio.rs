//! Tabular data loading, cleaning, MinMax normalization and stratified
//! splitting.
//!
//! The expected input is comma-separated UTF-8 text with a header line,
//! decimal-point numbers and no quoting. Every operation here is a pure
//! function of its inputs; splits are driven entirely by the seed.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A feature matrix (rows = samples) with column names and binary labels
/// (0 = negative, 1 = positive).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    feature_names: Vec<String>,
    features: Array2<T>,
    labels: Vec<u8>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset, validating shape agreement and label values.
    /// Finiteness of feature values is established by [`load_csv`] and
    /// re-established by [`clean`], which drops non-finite rows.
    pub fn new(feature_names: Vec<String>, features: Array2<T>, labels: Vec<u8>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.nrows(),
                right: labels.len(),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::ShapeMismatch {
                expected: feature_names.len(),
                found: features.ncols(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParam(format!(
                "labels must be 0 or 1, found {bad}"
            )));
        }
        Ok(Dataset {
            feature_names,
            features,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Array2<T> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, T> {
        self.features.row(i)
    }

    /// (negative, positive) label counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        for &r in rows {
            if r >= self.n_rows() {
                return Err(Error::RowOutOfRange {
                    index: r,
                    rows: self.n_rows(),
                });
            }
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        })
    }

    /// New dataset containing the given feature columns, in the given order.
    pub fn subset_columns(&self, columns: &[usize]) -> Result<Self> {
        for &c in columns {
            if c >= self.n_features() {
                return Err(Error::ShapeMismatch {
                    expected: self.n_features(),
                    found: c + 1,
                });
            }
        }
        Ok(Dataset {
            feature_names: columns
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            features: self.features.select(Axis(1), columns),
            labels: self.labels.clone(),
        })
    }
}

/// Per-column bounds fitted by [`fit_minmax`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams<T: Scalar> {
    min: Vec<T>,
    max: Vec<T>,
}

impl<T: Scalar> ScalerParams<T> {
    pub fn new(min: Vec<T>, max: Vec<T>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::LengthMismatch {
                left: min.len(),
                right: max.len(),
            });
        }
        if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
            return Err(Error::InvalidParam(
                "scaler minimum exceeds maximum".into(),
            ));
        }
        Ok(ScalerParams { min, max })
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn column_bounds(&self, c: usize) -> (T, T) {
        (self.min[c], self.max[c])
    }

    /// `name,min,max` lines with a header, full-precision decimal rendering.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("feature,min,max\n");
        for (i, name) in names.iter().enumerate() {
            out.push_str(&format!("{name},{},{}\n", self.min[i], self.max[i]));
        }
        out
    }

    /// Parses the [`to_csv`](Self::to_csv) rendering back into names and bounds.
    pub fn parse_csv(text: &str) -> Result<(Vec<String>, ScalerParams<T>)> {
        let mut lines = text.lines();
        if lines.next() != Some("feature,min,max") {
            return Err(Error::InvalidParam(
                "scaler file must start with a feature,min,max header".into(),
            ));
        }
        let mut names = Vec::new();
        let mut min = Vec::new();
        let mut max = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidParam(format!(
                    "malformed scaler line {line:?}"
                )));
            }
            let parse = |s: &str| -> Result<T> {
                s.trim()
                    .parse()
                    .ok()
                    .filter(|v: &T| v.is_finite())
                    .ok_or_else(|| Error::InvalidParam(format!("bad scaler bound {s:?}")))
            };
            names.push(fields[0].to_string());
            min.push(parse(fields[1])?);
            max.push(parse(fields[2])?);
        }
        Ok((names, ScalerParams::new(min, max)?))
    }
}

/// Writes a dataset as labeled CSV, label column first. Reals use
/// full-precision decimal rendering, so a reload is value-exact.
pub fn write_csv<T: Scalar>(data: &Dataset<T>, label_column: &str, path: &Path) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = |line: String| -> Result<()> {
        out.write_all(line.as_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    write(format!("{label_column},{}\n", data.feature_names().join(",")))?;
    for (row, &label) in data.features().rows().into_iter().zip(data.labels()) {
        let mut line = label.to_string();
        for v in row.iter() {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        write(line)?;
    }
    Ok(())
}

/// Disjoint train/test row partition covering every row exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Bookkeeping for [`clean`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CleanReport {
    pub rows_in: usize,
    pub duplicate_rows_dropped: usize,
    pub invalid_rows_dropped: usize,
    pub rows_out: usize,
}

impl CleanReport {
    /// Flat `key: value` text block.
    pub fn to_text(&self) -> String {
        format!(
            "rows_in: {}\nduplicate_rows_dropped: {}\ninvalid_rows_dropped: {}\nrows_out: {}\n",
            self.rows_in, self.duplicate_rows_dropped, self.invalid_rows_dropped, self.rows_out
        )
    }
}

/// Loads a labeled CSV file. The label column is removed from the features
/// and must contain only 0/1 values; all other cells must be finite numbers.
/// Column order is preserved from the header.
pub fn load_csv<T: Scalar>(path: &Path, label_column: &str) -> Result<Dataset<T>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) if !line.trim().is_empty() => line,
        Some((_, Err(source))) => {
            return Err(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        _ => return Err(Error::MissingHeader {
            path: path.to_path_buf(),
        }),
    };
    let columns: Vec<String> = header
        .trim_end_matches('\r')
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    let label_idx = columns
        .iter()
        .position(|c| c == label_column)
        .ok_or_else(|| Error::UnknownLabelColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let feature_names: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, c)| c.clone())
        .collect();

    let mut values: Vec<T> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1; // 1-based, header is line 1
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(Error::RowWidth {
                path: path.to_path_buf(),
                line: line_no,
                expected: columns.len(),
                found: cells.len(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            if c == label_idx {
                labels.push(parse_label(cell).ok_or_else(|| Error::InvalidLabel {
                    path: path.to_path_buf(),
                    line: line_no,
                    value: cell.to_string(),
                })?);
            } else {
                let v: T = cell.parse().ok().filter(|v: &T| v.is_finite()).ok_or_else(|| {
                    Error::NonNumericCell {
                        path: path.to_path_buf(),
                        line: line_no,
                        column: columns[c].clone(),
                        value: cell.to_string(),
                    }
                })?;
                values.push(v);
            }
        }
    }

    let n_rows = labels.len();
    let features = Array2::from_shape_vec((n_rows, feature_names.len()), values)
        .expect("row width was checked per line");
    Dataset::new(feature_names, features, labels)
}

fn parse_label(cell: &str) -> Option<u8> {
    let v = cell.parse::<f64>().ok()?;
    if v == 0.0 {
        Some(0)
    } else if v == 1.0 {
        Some(1)
    } else {
        None
    }
}

/// Drops exact duplicate rows (features and label identical, first occurrence
/// kept) and rows containing non-finite values; survivor order is preserved.
pub fn clean<T: Scalar>(data: &Dataset<T>) -> Result<(Dataset<T>, CleanReport)> {
    let rows_in = data.n_rows();
    let mut invalid = 0usize;
    let mut duplicates = 0usize;
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(rows_in);
    let mut keep: Vec<usize> = Vec::with_capacity(rows_in);

    for r in 0..rows_in {
        let row = data.row(r);
        if row.iter().any(|v| !v.is_finite()) {
            invalid += 1;
            continue;
        }
        // +0 collapses -0.0 and 0.0 into one key; NaN was excluded above.
        let mut key: Vec<u64> = row
            .iter()
            .map(|&v| (v + T::zero()).as_f64().to_bits())
            .collect();
        key.push(u64::from(data.labels()[r]));
        if seen.insert(key) {
            keep.push(r);
        } else {
            duplicates += 1;
        }
    }

    let report = CleanReport {
        rows_in,
        duplicate_rows_dropped: duplicates,
        invalid_rows_dropped: invalid,
        rows_out: keep.len(),
    };
    if keep.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cleaned = data.subset_rows(&keep)?;
    let (neg, pos) = cleaned.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }
    Ok((cleaned, report))
}

/// Per-column min and max over exactly the given rows.
pub fn fit_minmax<T: Scalar>(data: &Dataset<T>, rows: &[usize]) -> Result<ScalerParams<T>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    for &r in rows {
        if r >= data.n_rows() {
            return Err(Error::RowOutOfRange {
                index: r,
                rows: data.n_rows(),
            });
        }
    }
    let f = data.n_features();
    let mut min = vec![T::infinity(); f];
    let mut max = vec![T::neg_infinity(); f];
    for &r in rows {
        for (c, &v) in data.row(r).iter().enumerate() {
            if v < min[c] {
                min[c] = v;
            }
            if v > max[c] {
                max[c] = v;
            }
        }
    }
    ScalerParams::new(min, max)
}

/// Maps each cell `x` to `(x - min) / (max - min)`, clamped into `[0, 1]`.
/// Columns with `max == min` map to all zeros.
pub fn apply_minmax<T: Scalar>(data: &Dataset<T>, params: &ScalerParams<T>) -> Result<Dataset<T>> {
    if params.n_features() != data.n_features() {
        return Err(Error::ShapeMismatch {
            expected: params.n_features(),
            found: data.n_features(),
        });
    }
    let mut features = data.features().clone();
    for (c, mut column) in features.axis_iter_mut(Axis(1)).enumerate() {
        let (lo, hi) = params.column_bounds(c);
        let range = hi - lo;
        for v in column.iter_mut() {
            *v = if range == T::zero() {
                T::zero()
            } else {
                ((*v - lo) / range).max(T::zero()).min(T::one())
            };
        }
    }
    Dataset::new(
        data.feature_names().to_vec(),
        features,
        data.labels().to_vec(),
    )
}

/// Seeded per-class shuffle; per-class test count is `round(class size *
/// test_fraction)`. Both index lists are returned sorted ascending.
pub fn stratified_split<T: Scalar>(
    data: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for class in [0u8, 1u8] {
        let mut indices: Vec<usize> = (0..data.n_rows())
            .filter(|&r| data.labels()[r] == class)
            .collect();
        let n = indices.len();
        let n_test = (n as f64 * test_fraction).round() as usize;
        if n_test == 0 || n_test >= n {
            return Err(Error::ClassTooSmall { class, count: n });
        }
        indices.shuffle(&mut rng);
        test_rows.extend_from_slice(&indices[..n_test]);
        train_rows.extend_from_slice(&indices[n_test..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(SplitIndices {
        train_rows,
        test_rows,
    })
}
