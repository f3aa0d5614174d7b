//! Binary classification pipeline for imbalanced tabular health data:
//! MinMax normalization, SMOTE oversampling, black-widow-optimization
//! wrapper feature selection, eight from-scratch classifiers and a full
//! confusion-matrix metric suite.
//!
//! All numeric code is generic over the [`Scalar`] type (`f32` or `f64`);
//! the `*64` aliases at the crate root are the defaults used by the CLI.
//! Every operation is deterministic given its inputs and seeds.

pub mod balance;
pub mod bwo;
pub mod classifiers;
pub mod dataio;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod scalar;

mod seeding;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset64 = dataio::Dataset<f64>;
pub type Dataset32 = dataio::Dataset<f32>;
pub type ScalerParams64 = dataio::ScalerParams<f64>;
pub type ScalerParams32 = dataio::ScalerParams<f32>;
pub type ScoreVector64 = classifiers::ScoreVector<f64>;
pub type ScoreVector32 = classifiers::ScoreVector<f32>;
pub type TrainedModel64 = classifiers::TrainedModel<f64>;
pub type TrainedModel32 = classifiers::TrainedModel<f32>;
pub type RunReport64 = pipeline::RunReport<f64>;
pub type ComparisonTable64 = pipeline::ComparisonTable<f64>;
