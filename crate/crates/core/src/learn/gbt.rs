use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use super::{check_xy, LearnError};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn without replacement for each tree.
    pub subsample: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 6,
            learning_rate: 0.1,
            subsample: 0.8,
            min_samples_leaf: 1,
        }
    }
}

/// Least-squares gradient boosting over regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub n_features: usize,
    pub params: GbtParams,
    pub seed: u64,
    pub base: f64,
    trees: Vec<RegressionTree>,
}

impl GradientBoosting {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: GbtParams, seed: u64) -> Result<Self, LearnError> {
        let d = check_xy(x, y)?;
        if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
            return Err(LearnError::Param(format!(
                "learning_rate {} not in (0, 1]",
                params.learning_rate
            )));
        }
        if !(params.subsample > 0.0 && params.subsample <= 1.0) {
            return Err(LearnError::Param(format!(
                "subsample {} not in (0, 1]",
                params.subsample
            )));
        }
        let n = x.len();
        let base = y.iter().sum::<f64>() / n as f64;
        let mut fitted = vec![base; n];
        let mut resid = vec![0.0; n];
        let mut rng = seeded(seed);
        let m = ((params.subsample * n as f64).round() as usize).clamp(1, n);
        let tp = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            for i in 0..n {
                resid[i] = y[i] - fitted[i];
            }
            let mut idx = if m < n {
                let mut v = sample(&mut rng, n, m).into_vec();
                v.sort_unstable();
                v
            } else {
                (0..n).collect()
            };
            let tree = RegressionTree::fit_indices(x, &resid, &mut idx, tp, &mut rng);
            for i in 0..n {
                fitted[i] += params.learning_rate * tree.predict(&x[i]);
            }
            trees.push(tree);
        }
        Ok(Self {
            n_features: d,
            params,
            seed,
            base,
            trees,
        })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.base + self.params.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}
