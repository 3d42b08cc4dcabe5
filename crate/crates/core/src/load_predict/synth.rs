//! Synthetic encode-time corpora following a known multiplicative law.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::complexity::ComplexityFeatures;
use super::model::TimeSample;
use crate::rng::{seeded, GaussianSource};

/// `t = c · pixels · frames · preset_base^preset · 2^(−(crf − 22)/10)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeLaw {
    /// Seconds per pixel-frame at preset 0 and CRF 22.
    pub c: f64,
    /// Slow-down per step along the preset ladder.
    pub preset_base: f64,
    pub n_presets: u32,
    pub crfs: Vec<u32>,
    /// Encodes drawn per source clip.
    pub encodes_per_source: usize,
}

impl Default for TimeLaw {
    fn default() -> Self {
        Self {
            c: 3e-6,
            preset_base: 1.6,
            n_presets: 9,
            crfs: vec![22, 27, 32, 37, 42, 47],
            encodes_per_source: 6,
        }
    }
}

impl TimeLaw {
    pub fn seconds(&self, f: &ComplexityFeatures) -> f64 {
        self.c
            * f.total_pixels
            * f.n_frames
            * self.preset_base.powf(f.preset)
            * 2f64.powf(-(f.target_crf - 22.0) / 10.0)
    }
}

const HEIGHTS: [u32; 7] = [240, 360, 480, 720, 1080, 1440, 2160];
const RATES: [f64; 5] = [24.0, 25.0, 30.0, 50.0, 60.0];

/// `n` samples from sources of random geometry and content; each duration
/// follows `law` times `exp(noise_sigma · z)` with z standard normal.
pub fn generate_time_samples(n: usize, law: &TimeLaw, noise_sigma: f64, seed: u64) -> Vec<TimeSample> {
    let mut rng = seeded(seed);
    let mut gauss = GaussianSource::new(seed ^ 0x5eed);
    let per = law.encodes_per_source.max(1);
    let mut out = Vec::with_capacity(n);
    let mut source = 0usize;
    while out.len() < n {
        let h = *HEIGHTS.choose(&mut rng).expect("non-empty");
        let w = ((h as f64 * 16.0 / 9.0 / 2.0).round() * 2.0) as u32;
        let se = rng.random_range(2.0..40.0);
        let te = se * rng.random_range(0.02..0.5);
        let base = ComplexityFeatures {
            height: h as f64,
            total_pixels: (w * h) as f64,
            frame_rate: *RATES.choose(&mut rng).expect("non-empty"),
            n_frames: rng.random_range(60..=900) as f64,
            se_mean: se,
            se_max: se * rng.random_range(1.0..1.5),
            se_median: se * rng.random_range(0.9..1.1),
            se_std: se * rng.random_range(0.05..0.3),
            te_mean: te,
            te_max: te * rng.random_range(1.0..3.0),
            te_median: te * rng.random_range(0.8..1.0),
            te_std: te * rng.random_range(0.1..0.6),
            mean_brightness: rng.random_range(30.0..220.0),
            preset: 0.0,
            target_crf: 0.0,
            single_frame: false,
        };
        for _ in 0..per {
            if out.len() == n {
                break;
            }
            let mut f = base.clone();
            f.preset = rng.random_range(0..law.n_presets.max(1)) as f64;
            f.target_crf = *law.crfs.choose(&mut rng).unwrap_or(&22) as f64;
            let noise = if noise_sigma > 0.0 {
                (noise_sigma * gauss.next()).exp()
            } else {
                1.0
            };
            out.push(TimeSample {
                measured_seconds: law.seconds(&f) * noise,
                features: f,
                source_id: format!("src-{source:04}"),
            });
        }
        source += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_and_grouping() {
        let law = TimeLaw::default();
        let s = generate_time_samples(20, &law, 0.0, 1);
        assert_eq!(s.len(), 20);
        for x in &s {
            x.features.validate().unwrap();
            assert_eq!(x.measured_seconds, law.seconds(&x.features));
        }
        assert_eq!(s[0].source_id, s[5].source_id);
        assert_ne!(s[5].source_id, s[6].source_id);
        assert_eq!(
            generate_time_samples(20, &law, 0.3, 1),
            generate_time_samples(20, &law, 0.3, 1)
        );
    }

    #[test]
    fn law_closed_form() {
        let law = TimeLaw::default();
        let mut f = generate_time_samples(1, &law, 0.0, 0)[0].features.clone();
        f.total_pixels = 1920.0 * 1080.0;
        f.n_frames = 300.0;
        f.preset = 2.0;
        f.target_crf = 32.0;
        let want = 3e-6 * 1920.0 * 1080.0 * 300.0 * 2.56 * 0.5;
        assert!((law.seconds(&f) / want - 1.0).abs() < 1e-12);
    }
}
