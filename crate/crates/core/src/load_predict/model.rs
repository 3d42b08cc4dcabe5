use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use super::complexity::ComplexityFeatures;
use super::LoadError;
use crate::learn::{r_squared, GbtParams, GradientBoosting};

pub const MIN_TIME_SAMPLES: usize = 50;
pub const TIME_MODEL_SCHEMA_VERSION: u32 = 1;

/// Floor for linear-space predictions so a predicted duration is positive.
pub const MIN_PREDICTED_SECONDS: f64 = 1e-3;

/// One encode: its features, how long it took and which content it came
/// from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub features: ComplexityFeatures,
    pub measured_seconds: f64,
    pub source_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    Linear,
    Log,
}

impl fmt::Display for TargetTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetTransform::Linear => "linear",
            TargetTransform::Log => "log",
        })
    }
}

impl FromStr for TargetTransform {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(TargetTransform::Linear),
            "log" => Ok(TargetTransform::Log),
            _ => Err(LoadError::Data(format!("unknown transform `{s}` (linear or log)"))),
        }
    }
}

/// Gradient-boosted encode-time regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    pub schema_version: u32,
    pub feature_schema_hash: u64,
    pub feature_names: Vec<String>,
    pub transform: TargetTransform,
    pub seed: u64,
    pub n_samples: usize,
    pub ensemble: GradientBoosting,
}

impl TimeModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LoadError> {
        let m: Self = serde_json::from_str(s).map_err(|e| LoadError::Data(format!("time model: {e}")))?;
        if m.schema_version != TIME_MODEL_SCHEMA_VERSION {
            return Err(LoadError::Data(format!(
                "time model schema version {} (expected {TIME_MODEL_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

pub fn train_time_model(
    samples: &[TimeSample],
    transform: TargetTransform,
    params: GbtParams,
    seed: u64,
) -> Result<TimeModel, LoadError> {
    if samples.len() < MIN_TIME_SAMPLES {
        return Err(LoadError::Data(format!(
            "time model needs at least {MIN_TIME_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let mut x = Vec::with_capacity(samples.len());
    let mut y = Vec::with_capacity(samples.len());
    for s in samples {
        s.features.validate()?;
        let t = s.measured_seconds;
        if !t.is_finite() || (transform == TargetTransform::Log && t <= 0.0) {
            return Err(LoadError::Data(format!(
                "duration {t} of `{}` cannot be used with the {transform} transform",
                s.source_id
            )));
        }
        x.push(s.features.to_vec());
        y.push(match transform {
            TargetTransform::Linear => t,
            TargetTransform::Log => t.ln(),
        });
    }
    debug!("training {transform} time model on {} samples", samples.len());
    Ok(TimeModel {
        schema_version: TIME_MODEL_SCHEMA_VERSION,
        feature_schema_hash: ComplexityFeatures::schema_hash(),
        feature_names: ComplexityFeatures::NAMES.iter().map(|s| s.to_string()).collect(),
        transform,
        seed,
        n_samples: samples.len(),
        ensemble: GradientBoosting::fit(&x, &y, params, seed)?,
    })
}

fn check_schema(model: &TimeModel) -> Result<(), LoadError> {
    let want = ComplexityFeatures::schema_hash();
    if model.feature_schema_hash != want || model.ensemble.n_features != ComplexityFeatures::NAMES.len() {
        return Err(LoadError::Schema {
            model: model.feature_schema_hash,
            features: want,
        });
    }
    Ok(())
}

/// Predicted encode time in seconds; always positive.
pub fn predict_time(model: &TimeModel, features: &ComplexityFeatures) -> Result<f64, LoadError> {
    check_schema(model)?;
    let raw = model.ensemble.predict(&features.to_vec());
    Ok(match model.transform {
        TargetTransform::Linear => raw.max(MIN_PREDICTED_SECONDS),
        TargetTransform::Log => raw.exp(),
    })
}

/// Space the errors of [`evaluate`] are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSpace {
    /// Seconds against seconds.
    Linear,
    /// ln seconds against ln seconds.
    Log,
    /// A log-trained model mapped back to seconds.
    LogToLinear,
}

impl fmt::Display for EvalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalSpace::Linear => "linear",
            EvalSpace::Log => "log",
            EvalSpace::LogToLinear => "log_to_linear",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub space: EvalSpace,
    pub n: usize,
    /// `None` when the holdout targets have no variance.
    pub r2: Option<f64>,
    pub mae_pct: f64,
    pub smae_pct: f64,
}

/// 100·mean(|ŷ − y| / |y|).
pub fn mae_pct(y: &[f64], pred: &[f64]) -> Result<f64, LoadError> {
    if y.contains(&0.0) {
        return Err(LoadError::Data("MAE% is undefined for a zero target".into()));
    }
    Ok(100.0 * y.iter().zip(pred).map(|(a, p)| (p - a).abs() / a.abs()).sum::<f64>() / y.len() as f64)
}

/// 100·mean(|ŷ − y| / ((|y| + |ŷ|)/2)); a pair of zeros scores 0.
pub fn smae_pct(y: &[f64], pred: &[f64]) -> f64 {
    let sum: f64 = y
        .iter()
        .zip(pred)
        .map(|(a, p)| {
            let d = 0.5 * (a.abs() + p.abs());
            if d == 0.0 {
                0.0
            } else {
                (p - a).abs() / d
            }
        })
        .sum();
    100.0 * sum / y.len() as f64
}

/// Score `model` on `holdout` in `space`.
pub fn evaluate(model: &TimeModel, holdout: &[TimeSample], space: EvalSpace) -> Result<EvalReport, LoadError> {
    if holdout.is_empty() {
        return Err(LoadError::Data("empty holdout".into()));
    }
    if space == EvalSpace::LogToLinear && model.transform != TargetTransform::Log {
        return Err(LoadError::Data(
            "log_to_linear scoring needs a log-trained model".into(),
        ));
    }
    let one = |s: &TimeSample| predict_time(model, &s.features);
    #[cfg(feature = "parallel")]
    let pred: Vec<f64> = {
        use rayon::prelude::*;
        holdout.par_iter().map(one).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let pred: Vec<f64> = holdout.iter().map(one).collect::<Result<_, _>>()?;
    let mut y: Vec<f64> = holdout.iter().map(|s| s.measured_seconds).collect();
    if y.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(LoadError::Data("holdout durations must be positive".into()));
    }
    let pred = match space {
        EvalSpace::Log => {
            for t in &mut y {
                *t = t.ln();
            }
            pred.iter().map(|p| p.ln()).collect()
        }
        _ => pred,
    };
    Ok(EvalReport {
        space,
        n: y.len(),
        r2: r_squared(&y, &pred),
        mae_pct: mae_pct(&y, &pred)?,
        smae_pct: smae_pct(&y, &pred),
    })
}
