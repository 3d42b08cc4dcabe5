//! Encode-time prediction and cloud cost estimates: complexity features,
//! boosted-tree time models, duration classes and pricing tables.

mod bins;
mod complexity;
mod io;
mod model;
mod pricing;
mod split;
pub mod synth;

pub use bins::{
    classifier_report, make_bins, train_duration_classifier, BinMode, BinScheme, ClassifierReport, DurationClassifier,
};
pub use complexity::{block_energies, extract_complexity, ComplexityFeatures, COMPLEXITY_BLOCK};
pub use io::{read_features_csv, read_time_samples_csv, write_features_csv, write_time_samples_csv};
pub use model::{
    evaluate, mae_pct, predict_time, smae_pct, train_time_model, EvalReport, EvalSpace, TargetTransform, TimeModel,
    TimeSample, MIN_PREDICTED_SECONDS, MIN_TIME_SAMPLES, TIME_MODEL_SCHEMA_VERSION,
};
pub use pricing::{
    estimate_cost, CostEstimate, CostItem, CostJob, CostMode, FramerateClass, PerMinuteRate, PricingTable,
    ResolutionClass,
};
pub use split::{split_dataset, SplitMode};

use thiserror::Error;

use crate::learn::LearnError;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Data(String),
    #[error("model feature schema {model:#018x} does not match features {features:#018x}")]
    Schema { model: u64, features: u64 },
    #[error("bins: {0}")]
    Bins(String),
    #[error("pricing: {0}")]
    Pricing(String),
    #[error("no price for {0}")]
    MissingPrice(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
