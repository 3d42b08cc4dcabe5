//! Small deterministic learners: regression trees, bagged forests,
//! gradient boosting and a one-vs-rest linear SVM.

mod forest;
mod gbt;
mod svm;
mod tree;

pub use forest::{ForestParams, MaxFeatures, RandomForest};
pub use gbt::{GbtParams, GradientBoosting};
pub use svm::{LinearSvm, Standardizer, SvmParams};
pub use tree::{RegressionTree, TreeParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training set is empty")]
    Empty,
    #[error("row {row} has {got} features, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("targets ({targets}) and rows ({rows}) differ in length")]
    Length { rows: usize, targets: usize },
    #[error("non-finite value in row {0}")]
    NonFinite(usize),
    #[error("invalid parameter: {0}")]
    Param(String),
}

/// Check a design matrix and its targets; returns the feature count.
pub(crate) fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize, LearnError> {
    if x.is_empty() {
        return Err(LearnError::Empty);
    }
    if x.len() != y.len() {
        return Err(LearnError::Length {
            rows: x.len(),
            targets: y.len(),
        });
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(LearnError::Ragged {
                row: i,
                got: row.len(),
                expected: d,
            });
        }
        if row.iter().any(|v| !v.is_finite()) || !y[i].is_finite() {
            return Err(LearnError::NonFinite(i));
        }
    }
    Ok(d)
}

/// Coefficient of determination; `None` when the targets have no variance.
pub fn r_squared(y: &[f64], pred: &[f64]) -> Option<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst == 0.0 {
        return None;
    }
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    Some(1.0 - sse / sst)
}
