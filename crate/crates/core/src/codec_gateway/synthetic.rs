//! Analytic codec with a planted optimal λ scale.
//!
//! Quality is a fixed affine function of QP and the anchor rate follows
//! `quality = alpha + beta·ln(rate)`. Moving k away from `k_star` inflates
//! the rate by `∏(1 + gamma·(ln k − ln k*)²)` at every quality, so the
//! BD-rate of any k against k = 1 is known in closed form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::profile::EncodeSettings;
use super::stats::{FrameStats, FrameType};
use super::{CodecError, EncodeResult, Gateway, SourceClip};
use crate::rng::{fnv1a, mix_seed, GaussianSource};
use crate::video_io::ClipMeta;

/// QP to quality map of the synthetic codec.
pub fn synth_quality_for_qp(qp: u32) -> f64 {
    60.0 - 0.8 * qp as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCodecSpec {
    pub alpha: f64,
    pub beta: f64,
    /// Planted optimum per frame group.
    pub k_star: Vec<f64>,
    pub gamma: f64,
    /// Seconds per megapixel-frame at the reference CRF and speed factor 1.
    pub time_coeff: f64,
    pub preset_speed_factors: BTreeMap<String, f64>,
    /// Lognormal jitter on rate and time; 0 disables it.
    pub noise_std_log: f64,
    pub seed: u64,
    pub crf_ref: f64,
    /// QP steps per halving of encode time.
    pub step_ref: f64,
    /// k* multiplier per preset, to model proxies that disagree with the
    /// full-fidelity optimum.
    pub preset_k_star_scale: BTreeMap<String, f64>,
    /// k* scales as (height / reference_height)^exponent.
    pub k_star_resolution_exponent: f64,
    pub reference_height: usize,
    pub qp_list: Vec<u32>,
    /// Fastest first.
    pub preset_ladder: Vec<String>,
    pub default_preset: String,
}

impl Default for SyntheticCodecSpec {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 5.0,
            k_star: vec![2.0],
            gamma: 0.5,
            time_coeff: 0.05,
            preset_speed_factors: [("fast".to_string(), 0.01), ("medium".to_string(), 1.0)]
                .into_iter()
                .collect(),
            noise_std_log: 0.0,
            seed: 0,
            crf_ref: 32.0,
            step_ref: 6.0,
            preset_k_star_scale: BTreeMap::new(),
            k_star_resolution_exponent: 0.0,
            reference_height: 720,
            qp_list: vec![22, 27, 32, 37, 42],
            preset_ladder: vec!["fast".into(), "medium".into()],
            default_preset: "medium".into(),
        }
    }
}

impl SyntheticCodecSpec {
    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |m: &str| Err(CodecError::Spec(m.to_string()));
        if !(self.beta > 0.0) {
            return bad("beta must be positive");
        }
        if !(self.gamma >= 0.0) {
            return bad("gamma must be non-negative");
        }
        if self.k_star.is_empty() || self.k_star.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return bad("k_star needs at least one positive entry");
        }
        if !(self.time_coeff > 0.0) {
            return bad("time_coeff must be positive");
        }
        if !(self.noise_std_log >= 0.0) {
            return bad("noise_std_log must be non-negative");
        }
        if !(self.step_ref > 0.0) || self.reference_height == 0 {
            return bad("step_ref and reference_height must be positive");
        }
        if self
            .preset_speed_factors
            .values()
            .chain(self.preset_k_star_scale.values())
            .any(|v| !(*v > 0.0))
        {
            return bad("preset factors must be positive");
        }
        if self.qp_list.len() < 4 || self.qp_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("qp_list needs at least 4 strictly increasing entries");
        }
        Ok(())
    }

    pub fn groups(&self) -> usize {
        self.k_star.len()
    }

    pub fn settings(&self) -> EncodeSettings {
        EncodeSettings {
            qp_list: self.qp_list.clone(),
            preset: self.default_preset.clone(),
            preset_ladder: self.preset_ladder.clone(),
            frame_groups: (1..=self.groups()).map(|g| format!("G{g}")).collect(),
        }
    }

    /// Optimum seen by an encode of this geometry and preset.
    pub fn effective_k_star(&self, height: usize, preset: &str) -> Vec<f64> {
        let scale = self.preset_k_star_scale.get(preset).copied().unwrap_or(1.0)
            * (height as f64 / self.reference_height as f64).powf(self.k_star_resolution_exponent);
        self.k_star.iter().map(|k| k * scale).collect()
    }

    /// Rate inflation m(k) relative to the anchor.
    pub fn rate_multiplier(&self, k: &[f64], k_star: &[f64]) -> f64 {
        k_star
            .iter()
            .enumerate()
            .map(|(g, ks)| {
                let kg = k.get(g).copied().unwrap_or(1.0);
                1.0 + self.gamma * (kg.ln() - ks.ln()).powi(2)
            })
            .product()
    }

    /// BD-rate (%) of `k` against k = 1 implied by the model.
    pub fn closed_form_bd_rate(&self, k: &[f64], height: usize, preset: &str) -> f64 {
        let ks = self.effective_k_star(height, preset);
        100.0 * (self.rate_multiplier(k, &ks) / self.rate_multiplier(&[], &ks) - 1.0)
    }
}

pub fn synth_encode(
    spec: &SyntheticCodecSpec,
    meta: &ClipMeta,
    qp: u32,
    preset: &str,
    k: &[f64],
) -> Result<EncodeResult, CodecError> {
    if k.len() > spec.groups() {
        return Err(CodecError::KVector {
            given: k.len(),
            groups: spec.groups(),
        });
    }
    if k.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CodecError::Spec(format!("k entries must be positive, got {k:?}")));
    }
    let quality = synth_quality_for_qp(qp);
    let k_star = spec.effective_k_star(meta.height, preset);
    let mut rate = ((quality - spec.alpha) / spec.beta).exp() * spec.rate_multiplier(k, &k_star);
    let speed = spec.preset_speed_factors.get(preset).copied().unwrap_or(1.0);
    let mut time =
        spec.time_coeff * meta.megapixel_frames() * speed * 2f64.powf((spec.crf_ref - qp as f64) / spec.step_ref);
    if spec.noise_std_log > 0.0 {
        let mut words = vec![
            spec.seed,
            fnv1a(meta.source_id.as_bytes()),
            meta.width as u64,
            meta.height as u64,
            qp as u64,
            fnv1a(preset.as_bytes()),
        ];
        words.extend(k.iter().map(|v| v.to_bits()));
        let mut g = GaussianSource::new(mix_seed(&words));
        rate *= (spec.noise_std_log * g.next()).exp();
        time *= (spec.noise_std_log * g.next()).exp();
    }
    Ok(EncodeResult {
        bitrate_kbps: rate,
        wall_time: time,
        decoded: None,
        analytic_quality: Some(quality),
        per_frame_stats: Some(synth_frame_stats(meta, qp, rate, quality)),
    })
}

/// Frame-level statistics consistent with the clip rate: an I frame every
/// 32 frames, alternating P and B between them.
fn synth_frame_stats(meta: &ClipMeta, qp: u32, rate_kbps: f64, quality: f64) -> Vec<FrameStats> {
    let kind = |i: usize| {
        if i % 32 == 0 {
            FrameType::I
        } else if i % 2 == 1 {
            FrameType::B
        } else {
            FrameType::P
        }
    };
    let weight = |t: FrameType| match t {
        FrameType::I => 6.0,
        FrameType::P => 2.0,
        _ => 1.0,
    };
    let total_bits = rate_kbps * 1000.0 * meta.duration_seconds();
    let total_weight: f64 = (0..meta.n_frames).map(|i| weight(kind(i))).sum();
    (0..meta.n_frames)
        .map(|i| {
            let t = kind(i);
            let dq = match t {
                FrameType::I => -3.0,
                FrameType::P => 0.0,
                _ => 2.0,
            };
            FrameStats {
                frame_index: i,
                frame_type: t,
                bits: total_bits * weight(t) / total_weight,
                avg_qp: qp as f64 + dq,
                q_y: quality - 0.2 * dq,
                q_u: quality + 1.0 - 0.2 * dq,
                q_v: quality + 1.5 - 0.2 * dq,
            }
        })
        .collect()
}

/// [`Gateway`] over the analytic codec.
#[derive(Debug, Clone)]
pub struct SyntheticGateway {
    pub spec: SyntheticCodecSpec,
}

impl SyntheticGateway {
    pub fn new(spec: SyntheticCodecSpec) -> Result<Self, CodecError> {
        spec.validate()?;
        Ok(Self { spec })
    }
}

impl Gateway for SyntheticGateway {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError> {
        synth_encode(&self.spec, &src.meta, qp, preset, k)
    }
}
