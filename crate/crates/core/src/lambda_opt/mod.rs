//! Per-clip λ-scale search: BD-rate cost, 1-D/2-D k search over ln k,
//! proxy acceleration, early termination and learned k prediction.

mod features;
mod predictor;
mod proxy;
mod report;

pub use features::{extract_k_features, KFeatureVector};
pub use predictor::{predict_k, train_k_predictor, KPredictor, MIN_TRAINING_SAMPLES};
pub use proxy::{make_proxy, optimize_with_proxy, ProxyReport, ProxyStrategy};
pub use report::{summarize, write_outcomes_csv, write_summary_csv, BatchSummary};

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec_gateway::{rd_curve, CodecError, EncodeSettings, Gateway, RdRun, SourceClip};
use crate::learn::LearnError;
use crate::metrics::{bd_rate, QualityMetric, RdCurve};
use crate::optimizers::{minimize_bounded_ctl, powell_min_monitored, OptimError, PowellOptions};

pub const OUTCOME_SCHEMA_VERSION: u32 = 1;

pub const NO_IMPROVEMENT: &str = "no improvement";

#[derive(Debug, Error)]
pub enum LambdaError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("feature schema mismatch: model {model:016x}, features {features:016x}")]
    Schema { model: u64, features: u64 },
    #[error("{0}")]
    Data(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EarlyStop {
    /// BD-rate points the best cost must improve by over `patience` evaluations.
    pub min_improvement_pct: f64,
    pub patience: usize,
    pub encode_budget: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            min_improvement_pct: 0.05,
            patience: 3,
            encode_budget: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSearchConfig {
    pub k_bounds: (f64, f64),
    /// 1 (Brent) or 2 (Powell); k entry g scales frame group g.
    pub dims: usize,
    /// Tolerance on ln k.
    pub x_tol: f64,
    pub max_iter: usize,
    /// First bracketing step in ln k.
    pub initial_step: f64,
    pub metric: QualityMetric,
    pub proxy: ProxyStrategy,
    pub early_stop: Option<EarlyStop>,
}

impl Default for LambdaSearchConfig {
    fn default() -> Self {
        Self {
            k_bounds: (1.0 / 16.0, 16.0),
            dims: 1,
            x_tol: 0.01,
            max_iter: 40,
            initial_step: 0.5,
            metric: QualityMetric::Psnr,
            proxy: ProxyStrategy::None,
            early_stop: Some(EarlyStop::default()),
        }
    }
}

impl LambdaSearchConfig {
    pub fn validate(&self) -> Result<(), LambdaError> {
        let (lo, hi) = self.k_bounds;
        if !(lo > 0.0 && lo <= 1.0 && 1.0 <= hi && hi.is_finite() && lo < hi) {
            return Err(LambdaError::Config(format!(
                "k bounds ({lo}, {hi}) must satisfy 0 < k_min ≤ 1 ≤ k_max"
            )));
        }
        if !(self.dims == 1 || self.dims == 2) {
            return Err(LambdaError::Config(format!("dims must be 1 or 2, got {}", self.dims)));
        }
        if !(self.x_tol > 0.0) || self.max_iter == 0 || !(self.initial_step > 0.0) {
            return Err(LambdaError::Config(
                "x_tol, max_iter and initial_step must be positive".into(),
            ));
        }
        if let Some(es) = &self.early_stop {
            if es.patience == 0 || !(es.min_improvement_pct >= 0.0) {
                return Err(LambdaError::Config(
                    "early stop needs patience ≥ 1 and a non-negative threshold".into(),
                ));
            }
        }
        Ok(())
    }

    fn ln_bounds(&self) -> (f64, f64) {
        (self.k_bounds.0.ln(), self.k_bounds.1.ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub k: Vec<f64>,
    pub bd_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearchOutcome {
    pub schema_version: u32,
    pub source_id: String,
    pub encoder: String,
    pub k_opt: Vec<f64>,
    /// BD-rate (%) of `k_opt` against k = 1; never positive.
    pub bd_rate_gain: f64,
    /// Cost evaluations, one RD curve each.
    pub iterations: usize,
    /// Iterations of the underlying Brent/Powell loop.
    pub optimizer_iterations: usize,
    pub total_encodes: usize,
    /// Summed encoder wall time in seconds.
    pub wall_time: f64,
    pub history: Vec<HistoryEntry>,
    pub terminated_early: Option<String>,
    pub converged: bool,
    pub proxy: Option<ProxyReport>,
}

impl LambdaSearchOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

/// BD-rate (%) of the curve at `k` against `baseline`. A curve pair that
/// cannot be compared costs +∞ so a line search backs away from it.
pub fn bd_cost<G: Gateway + ?Sized>(
    gateway: &G,
    src: &SourceClip,
    settings: &EncodeSettings,
    k: &[f64],
    baseline: &RdCurve,
    metric: QualityMetric,
) -> Result<(f64, RdRun), CodecError> {
    let run = rd_curve(gateway, src, settings, k, metric)?;
    let cost = bd_rate(&run.curve, baseline).unwrap_or(f64::INFINITY);
    Ok((cost, run))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(String),
}

/// Early-termination rule over the cost history (one BD-rate per
/// evaluation) and the encodes spent so far.
pub fn should_continue(history: &[f64], encodes_used: usize, rule: &EarlyStop) -> Decision {
    if encodes_used > rule.encode_budget {
        return Decision::Stop(format!("encode budget of {} exhausted", rule.encode_budget));
    }
    let n = history.len();
    if n > rule.patience {
        let best = |h: &[f64]| h.iter().copied().fold(f64::INFINITY, f64::min);
        let before = best(&history[..n - rule.patience]);
        let now = best(history);
        let gained = if before.is_finite() {
            before - now
        } else {
            f64::INFINITY
        };
        if gained < rule.min_improvement_pct {
            return Decision::Stop(format!(
                "best cost improved by {gained:.4} < {} over {} evaluations",
                rule.min_improvement_pct, rule.patience
            ));
        }
    }
    Decision::Continue
}

struct Search<'a, G: ?Sized> {
    gateway: &'a G,
    src: &'a SourceClip,
    settings: &'a EncodeSettings,
    config: &'a LambdaSearchConfig,
    baseline: RdCurve,
    history: Vec<HistoryEntry>,
    /// Series the stall rule watches: every cost in 1-D, the best cost
    /// after each Powell iteration in 2-D.
    progress: Vec<f64>,
    encodes: usize,
    wall_time: f64,
    stop: Option<String>,
    error: Option<CodecError>,
}

impl<G: Gateway + ?Sized> Search<'_, G> {
    fn eval(&mut self, ln_k: &[f64]) -> Option<f64> {
        if self.stop.is_some() || self.error.is_some() {
            return None;
        }
        if let Some(rule) = &self.config.early_stop {
            let next = self.encodes + self.settings.qp_list.len();
            if let Decision::Stop(why) = should_continue(&self.progress, next, rule) {
                self.stop = Some(why);
                return None;
            }
        }
        let k: Vec<f64> = ln_k.iter().map(|v| v.exp()).collect();
        match bd_cost(
            self.gateway,
            self.src,
            self.settings,
            &k,
            &self.baseline,
            self.config.metric,
        ) {
            Ok((cost, run)) => {
                self.encodes += run.encodes;
                self.wall_time += run.wall_time;
                if self.config.dims == 1 {
                    self.progress.push(cost);
                }
                self.history.push(HistoryEntry { k, bd_rate: cost });
                Some(cost)
            }
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }

    fn end_iteration(&mut self, best: f64) -> bool {
        self.progress.push(best);
        if let Some(rule) = &self.config.early_stop {
            if let Decision::Stop(why) = should_continue(&self.progress, self.encodes, rule) {
                self.stop = Some(why);
                return false;
            }
        }
        true
    }
}

/// Search the λ scale of `src` that minimises BD-rate against the encoder
/// default. The baseline curve at k = 1 is encoded first.
pub fn optimize_k<G: Gateway + ?Sized>(
    gateway: &G,
    src: &SourceClip,
    settings: &EncodeSettings,
    config: &LambdaSearchConfig,
) -> Result<LambdaSearchOutcome, LambdaError> {
    config.validate()?;
    if config.dims > settings.frame_groups.len().max(1) {
        return Err(LambdaError::Config(format!(
            "{} k dimensions but the encoder exposes {} frame groups",
            config.dims,
            settings.frame_groups.len()
        )));
    }
    let base = rd_curve(gateway, src, settings, &[], config.metric)?;
    let s = RefCell::new(Search {
        gateway,
        src,
        settings,
        config,
        baseline: base.curve,
        history: Vec::new(),
        progress: Vec::new(),
        encodes: base.encodes,
        wall_time: base.wall_time,
        stop: None,
        error: None,
    });
    let bounds = config.ln_bounds();
    let (optimizer_iterations, converged) = if config.dims == 1 {
        let r = minimize_bounded_ctl(
            |x| s.borrow_mut().eval(&[x]),
            0.0,
            config.initial_step,
            bounds,
            config.x_tol,
            config.max_iter,
        )?;
        (r.iterations, r.converged && !r.aborted)
    } else {
        let opts = PowellOptions {
            x_tol: config.x_tol,
            max_iter: config.max_iter,
            initial_step: config.initial_step,
            bounds: Some(vec![bounds; 2]),
        };
        let r = powell_min_monitored(
            |x| s.borrow_mut().eval(x),
            &[0.0, 0.0],
            &opts,
            |_, best| s.borrow_mut().end_iteration(best),
        )?;
        (r.iterations, r.converged && !r.aborted)
    };
    let s = s.into_inner();
    if let Some(e) = s.error {
        return Err(e.into());
    }
    let best = s
        .history
        .iter()
        .filter(|h| h.bd_rate.is_finite())
        .min_by(|a, b| a.bd_rate.total_cmp(&b.bd_rate))
        .cloned();
    let (k_opt, gain, terminated) = match best {
        Some(h) if h.bd_rate < 0.0 => (h.k, h.bd_rate, s.stop),
        _ => (vec![1.0; config.dims], 0.0, Some(NO_IMPROVEMENT.to_string())),
    };
    Ok(LambdaSearchOutcome {
        schema_version: OUTCOME_SCHEMA_VERSION,
        source_id: src.id().to_string(),
        encoder: gateway.name().to_string(),
        k_opt,
        bd_rate_gain: gain,
        iterations: s.history.len(),
        optimizer_iterations,
        total_encodes: s.encodes,
        wall_time: s.wall_time,
        history: s.history,
        terminated_early: terminated,
        converged,
        proxy: None,
    })
}
