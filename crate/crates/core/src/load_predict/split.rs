use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::TimeSample;
use super::LoadError;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Per-sample split: one source may land on both sides.
    Overfit,
    /// Per-source split: no source crosses the boundary.
    Generalised,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::Overfit => "overfit",
            SplitMode::Generalised => "generalised",
        })
    }
}

impl FromStr for SplitMode {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "overfit" => Ok(SplitMode::Overfit),
            "generalised" | "generalized" => Ok(SplitMode::Generalised),
            _ => Err(LoadError::Data(format!(
                "unknown split mode `{s}` (overfit or generalised)"
            ))),
        }
    }
}

/// Split into (train, test) with about `ratio` of the samples (overfit)
/// or of the sources (generalised) in train. Both sides are non-empty.
pub fn split_dataset(
    samples: &[TimeSample],
    mode: SplitMode,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<TimeSample>, Vec<TimeSample>), LoadError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(LoadError::Data(format!("train ratio {ratio} not in (0, 1)")));
    }
    let mut rng = seeded(seed);
    let take = |n: usize| ((ratio * n as f64).round() as usize).clamp(1, n - 1);
    match mode {
        SplitMode::Overfit => {
            if samples.len() < 2 {
                return Err(LoadError::Data("need at least 2 samples to split".into()));
            }
            let mut idx: Vec<usize> = (0..samples.len()).collect();
            idx.shuffle(&mut rng);
            let cut = take(samples.len());
            let mut train_idx = idx[..cut].to_vec();
            let mut test_idx = idx[cut..].to_vec();
            train_idx.sort_unstable();
            test_idx.sort_unstable();
            Ok((
                train_idx.iter().map(|&i| samples[i].clone()).collect(),
                test_idx.iter().map(|&i| samples[i].clone()).collect(),
            ))
        }
        SplitMode::Generalised => {
            let mut sources: Vec<&str> = samples
                .iter()
                .map(|s| s.source_id.as_str())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if sources.len() < 2 {
                return Err(LoadError::Data(format!(
                    "a generalised split needs at least 2 sources, got {}",
                    sources.len()
                )));
            }
            sources.shuffle(&mut rng);
            let train: BTreeSet<&str> = sources[..take(sources.len())].iter().copied().collect();
            Ok(samples
                .iter()
                .cloned()
                .partition(|s| train.contains(s.source_id.as_str())))
        }
    }
}
