//! Versioned flat text format for trained models.
//!
//! Layout: a `diabml-model 1` header, `kind` and `features` lines, the
//! kind-specific parameter sections, and a closing `end` line. Reals are
//! rendered with Rust's shortest-round-trip formatting, so parsing them
//! back is exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::adaboost::{AdaBoostModel, Stump};
use super::forest::ForestModel;
use super::knn::KnnModel;
use super::logistic::LogisticModel;
use super::mlp::{MlpModel, MlpWeights};
use super::naive_bayes::NaiveBayesModel;
use super::svm::SvmModel;
use super::tree::{Node, TreeModel};
use super::{ClassifierKind, TrainedModel};

const MAGIC: &str = "diabml-model 1";

pub fn model_to_string<T: Scalar>(model: &TrainedModel<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind {}", model.kind().name());
    let _ = writeln!(out, "features {}", model.n_features());
    match model {
        TrainedModel::NaiveBayes(m) => {
            let _ = writeln!(out, "log_prior {} {}", m.log_prior[0], m.log_prior[1]);
            write_vec(&mut out, "mean0", &m.mean[0]);
            write_vec(&mut out, "var0", &m.variance[0]);
            write_vec(&mut out, "mean1", &m.mean[1]);
            write_vec(&mut out, "var1", &m.variance[1]);
        }
        TrainedModel::Logistic(m) => {
            let _ = writeln!(out, "bias {}", m.bias);
            write_vec(&mut out, "weights", &m.weights);
        }
        TrainedModel::Tree(m) => write_tree(&mut out, m),
        TrainedModel::Knn(m) => {
            let _ = writeln!(out, "k {}", m.k);
            let _ = writeln!(out, "rows {}", m.reference.nrows());
            for (row, &label) in m.reference.rows().into_iter().zip(&m.labels) {
                let _ = write!(out, "{label}");
                for v in row.iter() {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
        TrainedModel::Forest(m) => {
            let _ = writeln!(out, "trees {}", m.trees.len());
            for tree in &m.trees {
                write_tree(&mut out, tree);
            }
        }
        TrainedModel::Svm(m) => {
            let _ = writeln!(out, "bias {}", m.bias);
            write_vec(&mut out, "weights", &m.weights);
        }
        TrainedModel::Mlp(m) => {
            let w = m.weights();
            let _ = writeln!(out, "hidden {}", w.hidden());
            write_iter(&mut out, "w1", w.w1.iter());
            write_vec(&mut out, "b1", &w.b1);
            write_vec(&mut out, "w2", &w.w2);
            let _ = writeln!(out, "b2 {}", w.b2);
        }
        TrainedModel::AdaBoost(m) => {
            let _ = writeln!(out, "stumps {}", m.stumps.len());
            for s in &m.stumps {
                let _ = writeln!(
                    out,
                    "stump {} {} {} {}",
                    s.feature, s.threshold, s.polarity, s.alpha
                );
            }
            let _ = writeln!(out, "fallback {}", m.fallback_prior);
        }
    }
    out.push_str("end\n");
    out
}

fn write_vec<T: Scalar>(out: &mut String, tag: &str, values: &[T]) {
    write_iter(out, tag, values.iter());
}

fn write_iter<'a, T: Scalar>(out: &mut String, tag: &str, values: impl Iterator<Item = &'a T>) {
    let _ = write!(out, "{tag}");
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

fn write_tree<T: Scalar>(out: &mut String, tree: &TreeModel<T>) {
    let _ = writeln!(out, "nodes {}", tree.nodes.len());
    for node in &tree.nodes {
        match node {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
            }
            Node::Leaf { prob } => {
                let _ = writeln!(out, "leaf {prob}");
            }
        }
    }
}

pub fn save_model<T: Scalar>(model: &TrainedModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<TrainedModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|message| Error::ModelFormat {
        path: path.to_path_buf(),
        message,
    })
}

pub fn model_from_str<T: Scalar>(text: &str) -> Result<TrainedModel<T>> {
    parse(text).map_err(|message| Error::ModelFormat {
        path: PathBuf::from("<string>"),
        message,
    })
}

struct Cursor<'a> {
    lines: std::str::Lines<'a>,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> std::result::Result<&'a str, String> {
        self.at += 1;
        self.lines
            .next()
            .ok_or_else(|| format!("unexpected end of file at line {}", self.at))
    }

    fn tagged(&mut self, tag: &str) -> std::result::Result<&'a str, String> {
        let line = self.next()?;
        line.strip_prefix(tag)
            .map(str::trim)
            .ok_or_else(|| format!("line {}: expected {tag:?}, found {line:?}", self.at))
    }
}

fn parse_scalar<T: Scalar>(s: &str, at: usize) -> std::result::Result<T, String> {
    s.parse()
        .map_err(|_| format!("line {at}: bad number {s:?}"))
}

fn parse_usize(s: &str, at: usize) -> std::result::Result<usize, String> {
    s.parse()
        .map_err(|_| format!("line {at}: bad count {s:?}"))
}

fn parse_vec<T: Scalar>(
    cursor: &mut Cursor<'_>,
    tag: &str,
    expected: usize,
) -> std::result::Result<Vec<T>, String> {
    let rest = cursor.tagged(tag)?;
    let values: std::result::Result<Vec<T>, String> = rest
        .split_whitespace()
        .map(|s| parse_scalar(s, cursor.at))
        .collect();
    let values = values?;
    if values.len() != expected {
        return Err(format!(
            "line {}: {tag} expected {expected} values, found {}",
            cursor.at,
            values.len()
        ));
    }
    Ok(values)
}

fn parse_tree<T: Scalar>(
    cursor: &mut Cursor<'_>,
    n_features: usize,
) -> std::result::Result<TreeModel<T>, String> {
    let count = parse_usize(cursor.tagged("nodes")?, cursor.at)?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let line = cursor.next()?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("split") => {
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 4 {
                    return Err(format!("line {}: malformed split node", cursor.at));
                }
                nodes.push(Node::Split {
                    feature: parse_usize(fields[0], cursor.at)?,
                    threshold: parse_scalar(fields[1], cursor.at)?,
                    left: parse_usize(fields[2], cursor.at)?,
                    right: parse_usize(fields[3], cursor.at)?,
                });
            }
            Some("leaf") => {
                let prob = parts
                    .next()
                    .ok_or_else(|| format!("line {}: malformed leaf node", cursor.at))?;
                nodes.push(Node::Leaf {
                    prob: parse_scalar(prob, cursor.at)?,
                });
            }
            _ => return Err(format!("line {}: unknown node {line:?}", cursor.at)),
        }
    }
    // Child links must stay inside the node table.
    for node in &nodes {
        if let Node::Split { left, right, .. } = node {
            if *left >= nodes.len() || *right >= nodes.len() {
                return Err("tree node index out of range".into());
            }
        }
    }
    Ok(TreeModel { nodes, n_features })
}

fn parse<T: Scalar>(text: &str) -> std::result::Result<TrainedModel<T>, String> {
    let mut cursor = Cursor {
        lines: text.lines(),
        at: 0,
    };
    let magic = cursor.next()?;
    if magic != MAGIC {
        return Err(format!("unsupported header {magic:?}"));
    }
    let kind_name = cursor.tagged("kind")?;
    let kind = ClassifierKind::from_name(kind_name)
        .ok_or_else(|| format!("unknown classifier kind {kind_name:?}"))?;
    let n_features = parse_usize(cursor.tagged("features")?, cursor.at)?;

    let model = match kind {
        ClassifierKind::NaiveBayes => {
            let priors = parse_vec::<T>(&mut cursor, "log_prior", 2)?;
            let mean0 = parse_vec(&mut cursor, "mean0", n_features)?;
            let var0 = parse_vec(&mut cursor, "var0", n_features)?;
            let mean1 = parse_vec(&mut cursor, "mean1", n_features)?;
            let var1 = parse_vec(&mut cursor, "var1", n_features)?;
            TrainedModel::NaiveBayes(NaiveBayesModel {
                log_prior: [priors[0], priors[1]],
                mean: [mean0, mean1],
                variance: [var0, var1],
            })
        }
        ClassifierKind::LogisticRegression | ClassifierKind::LinearSvm => {
            let bias = parse_scalar(cursor.tagged("bias")?, cursor.at)?;
            let weights = parse_vec(&mut cursor, "weights", n_features)?;
            if kind == ClassifierKind::LogisticRegression {
                TrainedModel::Logistic(LogisticModel { bias, weights })
            } else {
                TrainedModel::Svm(SvmModel { weights, bias })
            }
        }
        ClassifierKind::DecisionTree => TrainedModel::Tree(parse_tree(&mut cursor, n_features)?),
        ClassifierKind::Knn => {
            let k = parse_usize(cursor.tagged("k")?, cursor.at)?;
            let rows = parse_usize(cursor.tagged("rows")?, cursor.at)?;
            let mut labels = Vec::with_capacity(rows);
            let mut values = Vec::with_capacity(rows * n_features);
            for _ in 0..rows {
                let line = cursor.next()?;
                let mut parts = line.split_whitespace();
                let label = parts
                    .next()
                    .ok_or_else(|| format!("line {}: empty reference row", cursor.at))?;
                let label = parse_usize(label, cursor.at)?;
                if label > 1 {
                    return Err(format!("line {}: label must be 0 or 1", cursor.at));
                }
                labels.push(label as u8);
                let row: std::result::Result<Vec<T>, String> =
                    parts.map(|s| parse_scalar(s, cursor.at)).collect();
                let row = row?;
                if row.len() != n_features {
                    return Err(format!("line {}: reference row width", cursor.at));
                }
                values.extend(row);
            }
            if k == 0 || k > rows {
                return Err(format!("k={k} invalid for {rows} reference rows"));
            }
            let reference = Array2::from_shape_vec((rows, n_features), values)
                .map_err(|e| e.to_string())?;
            TrainedModel::Knn(KnnModel {
                reference,
                labels,
                k,
            })
        }
        ClassifierKind::RandomForest => {
            let count = parse_usize(cursor.tagged("trees")?, cursor.at)?;
            if count == 0 {
                return Err("forest must contain at least one tree".into());
            }
            let trees: std::result::Result<Vec<_>, String> = (0..count)
                .map(|_| parse_tree(&mut cursor, n_features))
                .collect();
            TrainedModel::Forest(ForestModel { trees: trees? })
        }
        ClassifierKind::Mlp => {
            let hidden = parse_usize(cursor.tagged("hidden")?, cursor.at)?;
            let w1_flat = parse_vec::<T>(&mut cursor, "w1", hidden * n_features)?;
            let b1 = parse_vec(&mut cursor, "b1", hidden)?;
            let w2 = parse_vec(&mut cursor, "w2", hidden)?;
            let b2 = parse_scalar(cursor.tagged("b2")?, cursor.at)?;
            let w1 = Array2::from_shape_vec((hidden, n_features), w1_flat)
                .map_err(|e| e.to_string())?;
            TrainedModel::Mlp(MlpModel {
                weights: MlpWeights { w1, b1, w2, b2 },
            })
        }
        ClassifierKind::AdaBoost => {
            let count = parse_usize(cursor.tagged("stumps")?, cursor.at)?;
            let mut stumps = Vec::with_capacity(count);
            for _ in 0..count {
                let rest = cursor.tagged("stump")?;
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 4 {
                    return Err(format!("line {}: malformed stump", cursor.at));
                }
                let feature = parse_usize(fields[0], cursor.at)?;
                if feature >= n_features {
                    return Err(format!("line {}: stump feature out of range", cursor.at));
                }
                let polarity: i8 = fields[2]
                    .parse()
                    .map_err(|_| format!("line {}: bad polarity", cursor.at))?;
                if polarity != 1 && polarity != -1 {
                    return Err(format!("line {}: polarity must be +-1", cursor.at));
                }
                stumps.push(Stump {
                    feature,
                    threshold: parse_scalar(fields[1], cursor.at)?,
                    polarity,
                    alpha: parse_scalar(fields[3], cursor.at)?,
                });
            }
            let fallback_prior = parse_scalar(cursor.tagged("fallback")?, cursor.at)?;
            TrainedModel::AdaBoost(AdaBoostModel {
                stumps,
                fallback_prior,
                n_features,
            })
        }
    };

    let end = cursor.next()?;
    if end != "end" {
        return Err(format!("expected trailing \"end\", found {end:?}"));
    }
    Ok(model)
}
