use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use super::complexity::ComplexityFeatures;
use super::model::TimeSample;
use super::LoadError;
use crate::learn::{LinearSvm, Standardizer, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    Linear,
    Geometric,
}

impl fmt::Display for BinMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinMode::Linear => "linear",
            BinMode::Geometric => "geometric",
        })
    }
}

impl FromStr for BinMode {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(BinMode::Linear),
            "geometric" => Ok(BinMode::Geometric),
            _ => Err(LoadError::Data(format!("unknown bin mode `{s}` (linear or geometric)"))),
        }
    }
}

/// Duration classes: bin i is `[edges[i−1], edges[i])`, with the first
/// bin starting at 0 and the last open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinScheme {
    pub mode: BinMode,
    pub edges: Vec<f64>,
}

impl BinScheme {
    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn bin_index(&self, seconds: f64) -> usize {
        self.edges.partition_point(|e| *e <= seconds)
    }

    pub fn validate(&self) -> Result<(), LoadError> {
        if self.edges.iter().any(|e| !(*e > 0.0 && e.is_finite())) || self.edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LoadError::Bins(format!(
                "edges must be positive and ascending: {:?}",
                self.edges
            )));
        }
        Ok(())
    }

    /// The same scheme without interior edge `i` (bins i and i+1 merged).
    fn merged(&self, i: usize) -> Self {
        let mut edges = self.edges.clone();
        edges.remove(i);
        Self { mode: self.mode, edges }
    }
}

/// `n` bins over `[t_min, t_max]`: equal widths, or edges at
/// `t_min·(t_max/t_min)^(i/n)`. Only the n − 1 interior edges are kept.
pub fn make_bins(mode: BinMode, n: usize, t_min: f64, t_max: f64) -> Result<BinScheme, LoadError> {
    if n < 2 {
        return Err(LoadError::Bins(format!("need at least 2 bins, got {n}")));
    }
    let lo_ok = match mode {
        BinMode::Linear => t_min >= 0.0,
        BinMode::Geometric => t_min > 0.0,
    };
    if !(lo_ok && t_min < t_max && t_max.is_finite()) {
        return Err(LoadError::Bins(format!("invalid {mode} range [{t_min}, {t_max}]")));
    }
    let edges = (1..n)
        .map(|i| {
            let f = i as f64 / n as f64;
            match mode {
                BinMode::Linear => t_min + (t_max - t_min) * f,
                BinMode::Geometric => t_min * (t_max / t_min).powf(f),
            }
        })
        .collect();
    let s = BinScheme { mode, edges };
    s.validate()?;
    Ok(s)
}

/// sign(x)·ln(1 + |x|) per feature, so pixel counts and frame counts
/// spanning decades become comparable.
fn log_row(f: &ComplexityFeatures) -> Vec<f64> {
    f.to_vec().into_iter().map(|v| v.signum() * v.abs().ln_1p()).collect()
}

/// Standardized log features followed by all their pairwise products: an
/// explicit degree-2 polynomial kernel. One-vs-rest needs it to carve out
/// the middle duration classes, which are slabs in log time.
fn expand(scaler: &Standardizer, f: &ComplexityFeatures) -> Vec<f64> {
    let z = scaler.apply(&log_row(f));
    let mut out = z.clone();
    for i in 0..z.len() {
        for j in i..z.len() {
            out.push(z[i] * z[j]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationClassifier {
    pub feature_schema_hash: u64,
    /// Bins actually used; empty training bins are merged away.
    pub bins: BinScheme,
    pub scaler: Standardizer,
    pub svm: LinearSvm,
}

impl DurationClassifier {
    pub fn predict_bin(&self, features: &ComplexityFeatures) -> usize {
        self.svm.predict(&expand(&self.scaler, features))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// `None` for classes without samples.
    pub per_class_recall: Vec<Option<f64>>,
    /// Mean recall over classes that have samples.
    pub macro_recall: f64,
}

pub fn classifier_report(clf: &DurationClassifier, samples: &[TimeSample]) -> ClassifierReport {
    let k = clf.bins.n_bins();
    let mut confusion = vec![vec![0usize; k]; k];
    for s in samples {
        confusion[clf.bins.bin_index(s.measured_seconds)][clf.predict_bin(&s.features)] += 1;
    }
    let per_class_recall: Vec<Option<f64>> = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: usize = row.iter().sum();
            (n > 0).then(|| row[i] as f64 / n as f64)
        })
        .collect();
    let present: Vec<f64> = per_class_recall.iter().flatten().copied().collect();
    let macro_recall = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };
    ClassifierReport {
        confusion,
        per_class_recall,
        macro_recall,
    }
}

/// Train a one-vs-rest linear classifier from features to duration bin.
/// Bins with no training samples are merged into a neighbour (with a
/// warning); the report is on the training set.
pub fn train_duration_classifier(
    samples: &[TimeSample],
    bins: &BinScheme,
    params: SvmParams,
    seed: u64,
) -> Result<(DurationClassifier, ClassifierReport), LoadError> {
    bins.validate()?;
    if samples.is_empty() {
        return Err(LoadError::Data("no samples".into()));
    }
    let mut bins = bins.clone();
    loop {
        let mut counts = vec![0usize; bins.n_bins()];
        for s in samples {
            counts[bins.bin_index(s.measured_seconds)] += 1;
        }
        let Some(empty) = counts.iter().position(|c| *c == 0) else {
            break;
        };
        if bins.edges.is_empty() {
            break;
        }
        // Merge the empty bin with its upper neighbour, or the lower one
        // for the last bin.
        let edge = empty.min(bins.edges.len() - 1);
        warn!("duration bin {empty} is empty; merging at edge {}", bins.edges[edge]);
        bins = bins.merged(edge);
    }
    if bins.n_bins() < 2 {
        return Err(LoadError::Bins("all durations fall in one bin".into()));
    }
    let logs: Vec<Vec<f64>> = samples.iter().map(|s| log_row(&s.features)).collect();
    let scaler = Standardizer::fit(&logs);
    let x: Vec<Vec<f64>> = samples.iter().map(|s| expand(&scaler, &s.features)).collect();
    let labels: Vec<usize> = samples.iter().map(|s| bins.bin_index(s.measured_seconds)).collect();
    let svm = LinearSvm::fit(&x, &labels, bins.n_bins(), params, seed)?;
    let clf = DurationClassifier {
        feature_schema_hash: ComplexityFeatures::schema_hash(),
        bins,
        scaler,
        svm,
    };
    let report = classifier_report(&clf, samples);
    Ok((clf, report))
}
