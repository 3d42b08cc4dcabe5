use log::warn;
use serde::{Deserialize, Serialize};

use super::features::KFeatureVector;
use super::LambdaError;
use crate::learn::{ForestParams, RandomForest};

pub const MIN_TRAINING_SAMPLES: usize = 20;
pub const PREDICTOR_SCHEMA_VERSION: u32 = 1;

/// Random-forest regressor from [`KFeatureVector`] to k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPredictor {
    pub schema_version: u32,
    pub feature_schema_hash: u64,
    pub feature_names: Vec<String>,
    pub forest: RandomForest,
}

impl KPredictor {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LambdaError> {
        serde_json::from_str(s).map_err(|e| LambdaError::Data(format!("k model: {e}")))
    }
}

/// Fit a forest to (features, k) pairs. One-dimensional k only; train one
/// model per frame group for vector k.
pub fn train_k_predictor(
    dataset: &[(KFeatureVector, f64)],
    params: ForestParams,
    seed: u64,
) -> Result<KPredictor, LambdaError> {
    if dataset.len() < MIN_TRAINING_SAMPLES {
        return Err(LambdaError::Data(format!(
            "k predictor needs at least {MIN_TRAINING_SAMPLES} samples, got {}",
            dataset.len()
        )));
    }
    for (f, k) in dataset {
        f.validate()?;
        if !(*k > 0.0 && k.is_finite()) {
            return Err(LambdaError::Data(format!("training target k = {k} is not positive")));
        }
    }
    let x: Vec<Vec<f64>> = dataset.iter().map(|(f, _)| f.to_vec()).collect();
    let y: Vec<f64> = dataset.iter().map(|(_, k)| *k).collect();
    if y.iter().all(|k| *k == y[0]) {
        warn!("all training targets equal {}; the model is constant", y[0]);
    }
    Ok(KPredictor {
        schema_version: PREDICTOR_SCHEMA_VERSION,
        feature_schema_hash: KFeatureVector::schema_hash(),
        feature_names: KFeatureVector::NAMES.iter().map(|s| s.to_string()).collect(),
        forest: RandomForest::fit(&x, &y, params, seed)?,
    })
}

/// Predicted k clamped to `bounds`.
pub fn predict_k(model: &KPredictor, features: &KFeatureVector, bounds: (f64, f64)) -> Result<f64, LambdaError> {
    let want = KFeatureVector::schema_hash();
    if model.feature_schema_hash != want || model.forest.n_features != KFeatureVector::NAMES.len() {
        return Err(LambdaError::Schema {
            model: model.feature_schema_hash,
            features: want,
        });
    }
    Ok(model.forest.predict(&features.to_vec()).clamp(bounds.0, bounds.1))
}
