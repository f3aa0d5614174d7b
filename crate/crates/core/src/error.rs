//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing header row")]
    MissingHeader { path: PathBuf },

    #[error("{path}: label column {column:?} not found in header")]
    UnknownLabelColumn { path: PathBuf, column: String },

    #[error("{path}: line {line}, column {column:?}: cell {value:?} is not a finite number")]
    NonNumericCell {
        path: PathBuf,
        line: usize,
        column: String,
        value: String,
    },

    #[error("{path}: line {line}: label {value:?} is not 0 or 1")]
    InvalidLabel {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RowWidth {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("only one class present in the labels")]
    SingleClass,

    #[error("expected {expected} feature columns, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },

    #[error("row index list is empty")]
    EmptyRows,

    #[error("class {class} has {count} rows, too few to appear in both split parts")]
    ClassTooSmall { class: u8, count: usize },

    #[error("k={k} neighbors requested but only {available} other points are available")]
    KTooLarge { k: usize, available: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("confusion counts are all zero")]
    AllZeroCounts,

    #[error("{what} contains a non-finite value")]
    NonFinite { what: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{kind} training diverged (non-finite loss or parameter)")]
    Divergence { kind: &'static str },

    #[error("fitness evaluation failed at iteration {iteration}, candidate {candidate}: {source}")]
    Fitness {
        iteration: usize,
        candidate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
