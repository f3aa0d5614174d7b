//! Eight from-scratch binary classifiers behind one training/scoring
//! surface. Every model is deterministic for a fixed config (including its
//! seed) and emits scores in [0, 1]; predicted label is 1 exactly when the
//! score is >= 0.5, for every kind.

pub mod adaboost;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod mlp;
pub mod naive_bayes;
pub mod serialize;
pub mod svm;
pub mod tree;

pub use adaboost::AdaBoostParams;
pub use forest::ForestParams;
pub use knn::KnnParams;
pub use logistic::LogisticParams;
pub use mlp::MlpParams;
pub use naive_bayes::NaiveBayesParams;
pub use serialize::{load_model, model_from_str, model_to_string, save_model};
pub use svm::SvmParams;
pub use tree::TreeParams;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// The closed set of supported classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    NaiveBayes,
    LogisticRegression,
    DecisionTree,
    Knn,
    RandomForest,
    LinearSvm,
    Mlp,
    AdaBoost,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
        ClassifierKind::DecisionTree,
        ClassifierKind::Knn,
        ClassifierKind::RandomForest,
        ClassifierKind::LinearSvm,
        ClassifierKind::Mlp,
        ClassifierKind::AdaBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::Knn => "knn",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::AdaBoost => "adaboost",
        }
    }

    /// Short label used in tables and file names.
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "NB",
            ClassifierKind::LogisticRegression => "LR",
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::LinearSvm => "SVM",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::AdaBoost => "AdaBoost",
        }
    }

    pub fn from_name(name: &str) -> Option<ClassifierKind> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "naive_bayes" | "nb" => Some(ClassifierKind::NaiveBayes),
            "logistic_regression" | "lr" => Some(ClassifierKind::LogisticRegression),
            "decision_tree" | "dt" => Some(ClassifierKind::DecisionTree),
            "knn" => Some(ClassifierKind::Knn),
            "random_forest" | "rf" => Some(ClassifierKind::RandomForest),
            "linear_svm" | "svm" => Some(ClassifierKind::LinearSvm),
            "mlp" => Some(ClassifierKind::Mlp),
            "adaboost" | "ada" => Some(ClassifierKind::AdaBoost),
            _ => None,
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One classifier's recipe: its kind, seed, and the settings of every
/// family (only the active kind's settings are consulted).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub seed: u64,
    pub naive_bayes: NaiveBayesParams,
    pub logistic: LogisticParams,
    pub tree: TreeParams,
    pub knn: KnnParams,
    pub forest: ForestParams,
    pub svm: SvmParams,
    pub mlp: MlpParams,
    pub adaboost: AdaBoostParams,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierConfig {
            kind,
            seed: 0,
            naive_bayes: NaiveBayesParams::default(),
            logistic: LogisticParams::default(),
            tree: TreeParams::default(),
            knn: KnnParams::default(),
            forest: ForestParams::default(),
            svm: SvmParams::default(),
            mlp: MlpParams::default(),
            adaboost: AdaBoostParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Per-row scores in [0, 1], higher = more likely class 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(v) = values
            .iter()
            .find(|v| !v.is_finite() || **v < T::zero() || **v > T::one())
        {
            return Err(Error::InvalidParam(format!(
                "score {v} outside [0,1]"
            )));
        }
        Ok(ScoreVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }
}

impl<T: Scalar> std::ops::Index<usize> for ScoreVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// A trained classifier; immutable, safe to share for concurrent scoring.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel<T: Scalar> {
    NaiveBayes(naive_bayes::NaiveBayesModel<T>),
    Logistic(logistic::LogisticModel<T>),
    Tree(tree::TreeModel<T>),
    Knn(knn::KnnModel<T>),
    Forest(forest::ForestModel<T>),
    Svm(svm::SvmModel<T>),
    Mlp(mlp::MlpModel<T>),
    AdaBoost(adaboost::AdaBoostModel<T>),
}

fn check_training_data<T: Scalar>(x: &Array2<T>, y: &[u8]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if x.nrows() < 2 {
        return Err(Error::InvalidParam(
            "training needs at least two rows".into(),
        ));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "training features".into(),
        });
    }
    Ok(())
}

/// Trains the configured classifier. Deterministic for fixed (config, data).
pub fn train<T: Scalar>(
    config: &ClassifierConfig,
    x: &Array2<T>,
    y: &[u8],
) -> Result<TrainedModel<T>> {
    check_training_data(x, y)?;
    let standard;
    let x = if x.is_standard_layout() {
        x
    } else {
        standard = x.as_standard_layout().into_owned();
        &standard
    };
    Ok(match config.kind {
        ClassifierKind::NaiveBayes => {
            TrainedModel::NaiveBayes(naive_bayes::train(&config.naive_bayes, x, y)?)
        }
        ClassifierKind::LogisticRegression => {
            TrainedModel::Logistic(logistic::train(&config.logistic, x, y)?)
        }
        ClassifierKind::DecisionTree => TrainedModel::Tree(tree::train(&config.tree, x, y)?),
        ClassifierKind::Knn => TrainedModel::Knn(knn::train(&config.knn, config.seed, x, y)?),
        ClassifierKind::RandomForest => {
            TrainedModel::Forest(forest::train(&config.forest, config.seed, x, y)?)
        }
        ClassifierKind::LinearSvm => TrainedModel::Svm(svm::train(&config.svm, config.seed, x, y)?),
        ClassifierKind::Mlp => TrainedModel::Mlp(mlp::train(&config.mlp, config.seed, x, y)?),
        ClassifierKind::AdaBoost => {
            TrainedModel::AdaBoost(adaboost::train(&config.adaboost, x, y)?)
        }
    })
}

impl<T: Scalar> TrainedModel<T> {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            TrainedModel::Logistic(_) => ClassifierKind::LogisticRegression,
            TrainedModel::Tree(_) => ClassifierKind::DecisionTree,
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::Forest(_) => ClassifierKind::RandomForest,
            TrainedModel::Svm(_) => ClassifierKind::LinearSvm,
            TrainedModel::Mlp(_) => ClassifierKind::Mlp,
            TrainedModel::AdaBoost(_) => ClassifierKind::AdaBoost,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.n_features(),
            TrainedModel::Logistic(m) => m.weights.len(),
            TrainedModel::Tree(m) => m.n_features(),
            TrainedModel::Knn(m) => m.n_features(),
            TrainedModel::Forest(m) => m.n_features(),
            TrainedModel::Svm(m) => m.n_features(),
            TrainedModel::Mlp(m) => m.n_features(),
            TrainedModel::AdaBoost(m) => m.n_features(),
        }
    }

    /// Bias and weight vector, for the logistic model only.
    pub fn logistic_coefficients(&self) -> Option<(T, &[T])> {
        match self {
            TrainedModel::Logistic(m) => Some((m.bias, &m.weights)),
            _ => None,
        }
    }

    fn check_features(&self, x: &Array2<T>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::ShapeMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "features to score".into(),
            });
        }
        Ok(())
    }

    /// Class-1 confidence per row.
    pub fn predict_scores(&self, x: &Array2<T>) -> Result<ScoreVector<T>> {
        self.check_features(x)?;
        let standard;
        let x = if x.is_standard_layout() {
            x
        } else {
            standard = x.as_standard_layout().into_owned();
            &standard
        };
        let values: Vec<T> = match self {
            // knn scoring is quadratic; it parallelizes over rows.
            TrainedModel::Knn(m) => m.score_matrix(x),
            _ => x
                .rows()
                .into_iter()
                .map(|row| {
                    let row = row.as_slice().expect("contiguous row");
                    match self {
                        TrainedModel::NaiveBayes(m) => m.score_row(row),
                        TrainedModel::Logistic(m) => m.score_row(row),
                        TrainedModel::Tree(m) => m.score_row(row),
                        TrainedModel::Knn(_) => unreachable!(),
                        TrainedModel::Forest(m) => m.score_row(row),
                        TrainedModel::Svm(m) => m.score_row(row),
                        TrainedModel::Mlp(m) => m.score_row(row),
                        TrainedModel::AdaBoost(m) => m.score_row(row),
                    }
                })
                .collect(),
        };
        ScoreVector::new(values)
    }

    /// Label 1 exactly when the row's score is >= 0.5.
    pub fn predict_labels(&self, x: &Array2<T>) -> Result<Vec<u8>> {
        let half = T::cast(0.5);
        Ok(self
            .predict_scores(x)?
            .iter()
            .map(|&s| u8::from(s >= half))
            .collect())
    }
}
