use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_xy, LearnError};
use crate::rng::seeded;

/// Per-feature affine map to zero mean and unit variance; constant
/// features map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let (n, d) = (x.len() as f64, x[0].len());
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for row in x {
            for j in 0..d {
                mean[j] += row[j] / n;
            }
        }
        for row in x {
            for j in 0..d {
                std[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = s.sqrt();
        }
        Self { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// L2 regularisation strength.
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 60,
        }
    }
}

/// One-vs-rest linear SVM trained with Pegasos sub-gradient steps on
/// standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub n_classes: usize,
    pub scaler: Standardizer,
    /// Per class: weights followed by the bias.
    pub weights: Vec<Vec<f64>>,
}

impl LinearSvm {
    pub fn fit(
        x: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        params: SvmParams,
        seed: u64,
    ) -> Result<Self, LearnError> {
        let yf: Vec<f64> = labels.iter().map(|&c| c as f64).collect();
        let d = check_xy(x, &yf)?;
        if n_classes < 2 || labels.iter().any(|&c| c >= n_classes) {
            return Err(LearnError::Param(format!(
                "labels must lie in 0..{n_classes} with at least 2 classes"
            )));
        }
        if !(params.lambda > 0.0) || params.epochs == 0 {
            return Err(LearnError::Param("lambda and epochs must be positive".into()));
        }
        let scaler = Standardizer::fit(x);
        let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = seeded(seed);
        let mut weights = vec![vec![0.0; d + 1]; n_classes];
        let mut t = 0usize;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (params.lambda * t as f64);
                for (c, w) in weights.iter_mut().enumerate() {
                    let y = if labels[i] == c { 1.0 } else { -1.0 };
                    let margin = y * (dot(&w[..d], &z[i]) + w[d]);
                    let shrink = 1.0 - eta * params.lambda;
                    // The bias is shrunk too, as the weight of a constant
                    // feature; left free it keeps the huge early steps.
                    for wj in w.iter_mut() {
                        *wj *= shrink;
                    }
                    if margin < 1.0 {
                        for (wj, zj) in w[..d].iter_mut().zip(&z[i]) {
                            *wj += eta * y * zj;
                        }
                        w[d] += eta * y;
                    }
                }
            }
        }
        Ok(Self {
            n_classes,
            scaler,
            weights,
        })
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let z = self.scaler.apply(row);
        let d = z.len();
        self.weights.iter().map(|w| dot(&w[..d], &z) + w[d]).collect()
    }

    /// Highest-scoring class; ties go to the lower index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let s = self.scores(row);
        let mut best = 0;
        for c in 1..s.len() {
            if s[c] > s[best] {
                best = c;
            }
        }
        best
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_two_class() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, 3.0]).collect();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
        let m = LinearSvm::fit(&x, &y, 2, SvmParams::default(), 0).unwrap();
        for (r, c) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), *c);
        }
    }

    #[test]
    fn three_bands() {
        let x: Vec<Vec<f64>> = (0..90).map(|i| vec![i as f64 / 10.0]).collect();
        let y: Vec<usize> = (0..90).map(|i| i / 30).collect();
        let m = LinearSvm::fit(&x, &y, 3, SvmParams::default(), 1).unwrap();
        let acc = x.iter().zip(&y).filter(|(r, c)| m.predict(r) == **c).count();
        assert!(acc >= 80, "{acc}");
    }

    #[test]
    fn standardizer_constant_column() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.apply(&[3.0, 5.0]), vec![1.0, 0.0]);
    }
}
