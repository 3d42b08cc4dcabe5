use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use super::{check_xy, LearnError};
use crate::rng::{mix_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().round() as usize).max(1),
            MaxFeatures::Count(m) => m.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 12,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

/// Bagged regression trees; the prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub params: ForestParams,
    pub seed: u64,
    trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: ForestParams, seed: u64) -> Result<Self, LearnError> {
        let d = check_xy(x, y)?;
        if params.n_trees == 0 || params.max_depth == 0 {
            return Err(LearnError::Param("forest needs at least one tree of depth ≥ 1".into()));
        }
        if y.iter().all(|v| *v == y[0]) {
            warn!("constant target {}; forest reduces to a constant", y[0]);
        }
        let tp = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(params.max_features.resolve(d)),
        };
        let n = x.len();
        let grow = |t: usize| {
            let mut rng = seeded(mix_seed(&[seed, t as u64]));
            let mut idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            RegressionTree::fit_indices(x, y, &mut idx, tp, &mut rng)
        };
        #[cfg(feature = "parallel")]
        let trees = {
            use rayon::prelude::*;
            (0..params.n_trees).into_par_iter().map(grow).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let trees = (0..params.n_trees).map(grow).collect();
        Ok(Self {
            n_features: d,
            params,
            seed,
            trees,
        })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::r_squared;

    fn data(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = seeded(5);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y = x.iter().map(|r| 2.0 * r[0] + r[1] * r[1]).collect();
        (x, y)
    }

    #[test]
    fn fits_smooth_function() {
        let (x, y) = data(300);
        let p = ForestParams {
            n_trees: 30,
            max_features: MaxFeatures::All,
            ..Default::default()
        };
        let f = RandomForest::fit(&x, &y, p, 1).unwrap();
        let pred: Vec<f64> = x.iter().map(|r| f.predict(r)).collect();
        assert!(r_squared(&y, &pred).unwrap() > 0.95);
    }

    #[test]
    fn seeded_determinism() {
        let (x, y) = data(80);
        let p = ForestParams {
            n_trees: 10,
            ..Default::default()
        };
        let a = serde_json::to_string(&RandomForest::fit(&x, &y, p, 9).unwrap()).unwrap();
        let b = serde_json::to_string(&RandomForest::fit(&x, &y, p, 9).unwrap()).unwrap();
        let c = serde_json::to_string(&RandomForest::fit(&x, &y, p, 10).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
