use serde::{Deserialize, Serialize};

use super::LoadError;
use crate::dct::Dct;
use crate::rng::fnv1a;
use crate::video_io::{mean_brightness, Clip, Plane};

/// Side of the square luma tiles the energies are measured on.
pub const COMPLEXITY_BLOCK: usize = 32;

/// Content and job descriptors used to predict encode time.
///
/// Spatial energy (SE) of a tile is the mean absolute AC coefficient of its
/// 32×32 DCT; a frame's SE is the mean over tiles. Temporal energy (TE) of
/// frame t is the mean over tiles of |SE_tile(t) − SE_tile(t−1)|, so frame
/// 0 has none. Statistics are taken over frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityFeatures {
    pub height: f64,
    pub total_pixels: f64,
    pub frame_rate: f64,
    pub n_frames: f64,
    pub se_mean: f64,
    pub se_max: f64,
    pub se_median: f64,
    pub se_std: f64,
    pub te_mean: f64,
    pub te_max: f64,
    pub te_median: f64,
    pub te_std: f64,
    pub mean_brightness: f64,
    /// Position on the encoder's preset ladder, fastest first.
    pub preset: f64,
    pub target_crf: f64,
    /// Fewer than two frames: the TE statistics are zero placeholders.
    #[serde(default)]
    pub single_frame: bool,
}

macro_rules! feature_list {
    ($($f:ident),* $(,)?) => {
        impl ComplexityFeatures {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($f)),*];

            pub fn to_vec(&self) -> Vec<f64> {
                vec![$(self.$f),*]
            }

            /// Inverse of [`to_vec`](Self::to_vec); `single_frame` is left unset.
            pub fn from_slice(v: &[f64]) -> Option<Self> {
                let mut it = v.iter().copied();
                let out = Self {
                    $($f: it.next()?,)*
                    single_frame: false,
                };
                it.next().is_none().then_some(out)
            }
        }
    };
}

feature_list!(
    height,
    total_pixels,
    frame_rate,
    n_frames,
    se_mean,
    se_max,
    se_median,
    se_std,
    te_mean,
    te_max,
    te_median,
    te_std,
    mean_brightness,
    preset,
    target_crf,
);

impl ComplexityFeatures {
    pub fn schema_hash() -> u64 {
        fnv1a(Self::NAMES.join(",").as_bytes())
    }

    pub fn validate(&self) -> Result<(), LoadError> {
        let v = self.to_vec();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(LoadError::Data(format!("feature `{}` is not finite", Self::NAMES[i])));
        }
        let energies = [
            self.se_mean,
            self.se_max,
            self.se_median,
            self.se_std,
            self.te_mean,
            self.te_max,
            self.te_median,
            self.te_std,
        ];
        if energies.iter().any(|e| *e < 0.0) {
            return Err(LoadError::Data("energies must be non-negative".into()));
        }
        if !(self.height > 0.0 && self.total_pixels > 0.0 && self.frame_rate > 0.0 && self.n_frames > 0.0) {
            return Err(LoadError::Data("geometry and counts must be positive".into()));
        }
        Ok(())
    }
}

/// Mean, max, median and population standard deviation.
fn stats(v: &[f64]) -> [f64; 4] {
    if v.is_empty() {
        return [0.0; 4];
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    let median = if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    };
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    [mean, max, median, var.sqrt()]
}

/// Spatial energy of every whole 32×32 luma tile, row-major. Partial tiles
/// at the right and bottom edges are ignored.
pub fn block_energies(luma: &Plane, dct: &Dct) -> Vec<f64> {
    const B: usize = COMPLEXITY_BLOCK;
    let mut out = Vec::with_capacity((luma.width / B) * (luma.height / B));
    let mut block = vec![0.0; B * B];
    for by in 0..luma.height / B {
        for bx in 0..luma.width / B {
            let mut sum = 0u32;
            for y in 0..B {
                for (x, v) in luma.row(by * B + y)[bx * B..(bx + 1) * B].iter().enumerate() {
                    block[y * B + x] = *v as f64;
                    sum += *v as u32;
                }
            }
            // Removing the tile mean first makes the AC coefficients
            // independent of a brightness offset, bit for bit.
            let mean = sum as f64 / (B * B) as f64;
            for v in &mut block {
                *v -= mean;
            }
            dct.forward_2d(&mut block);
            let ac: f64 = block[1..].iter().map(|c| c.abs()).sum();
            out.push(ac / (B * B - 1) as f64);
        }
    }
    out
}

/// Complexity features of `clip` for an encode at ladder position
/// `preset` and constant rate factor `crf`.
pub fn extract_complexity(clip: &Clip, preset: u32, crf: u32) -> Result<ComplexityFeatures, LoadError> {
    let (w, h) = (clip.width(), clip.height());
    if w < COMPLEXITY_BLOCK || h < COMPLEXITY_BLOCK {
        return Err(LoadError::Data(format!(
            "luma is {w}x{h}; complexity needs at least {COMPLEXITY_BLOCK}x{COMPLEXITY_BLOCK}"
        )));
    }
    let dct = Dct::new(COMPLEXITY_BLOCK);
    let per_frame = |f: &crate::video_io::VideoFrame| block_energies(f.luma(), &dct);
    #[cfg(feature = "parallel")]
    let energies: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        clip.frames().par_iter().map(per_frame).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let energies: Vec<Vec<f64>> = clip.frames().iter().map(per_frame).collect();

    let nb = energies[0].len() as f64;
    let se: Vec<f64> = energies.iter().map(|e| e.iter().sum::<f64>() / nb).collect();
    let te: Vec<f64> = energies
        .windows(2)
        .map(|p| p[1].iter().zip(&p[0]).map(|(a, b)| (a - b).abs()).sum::<f64>() / nb)
        .collect();
    let [se_mean, se_max, se_median, se_std] = stats(&se);
    let [te_mean, te_max, te_median, te_std] = stats(&te);
    Ok(ComplexityFeatures {
        height: h as f64,
        total_pixels: (w * h) as f64,
        frame_rate: clip.frame_rate.fps(),
        n_frames: clip.len() as f64,
        se_mean,
        se_max,
        se_median,
        se_std,
        te_mean,
        te_max,
        te_median,
        te_std,
        mean_brightness: mean_brightness(clip),
        preset: preset as f64,
        target_crf: crf as f64,
        single_frame: clip.len() < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::{synth, ChromaSampling, VideoFrame};

    fn luma_clip(frames: Vec<Vec<u8>>, w: usize, h: usize) -> Clip {
        let (cw, ch) = ChromaSampling::Cs420.chroma_dims(w, h);
        let frames = frames
            .into_iter()
            .map(|y| {
                VideoFrame::new(
                    ChromaSampling::Cs420,
                    [
                        Plane::new(w, h, y),
                        Plane::filled(cw, ch, 128),
                        Plane::filled(cw, ch, 128),
                    ],
                )
                .unwrap()
            })
            .collect();
        let mut c = synth::constant_clip(w, h, 1, 30, 0);
        c = c.with_frames(frames).unwrap();
        c
    }

    /// Straight double-sum 2-D DCT-II, orthonormal.
    fn naive_ac_energy(px: &[f64], n: usize) -> f64 {
        use std::f64::consts::PI;
        let c = |k: usize| {
            if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            }
        };
        let mut sum = 0.0;
        for u in 0..n {
            for v in 0..n {
                if u == 0 && v == 0 {
                    continue;
                }
                let mut acc = 0.0;
                for y in 0..n {
                    for x in 0..n {
                        acc += px[y * n + x]
                            * ((PI * (2 * x + 1) as f64 * v as f64) / (2 * n) as f64).cos()
                            * ((PI * (2 * y + 1) as f64 * u as f64) / (2 * n) as f64).cos();
                    }
                }
                sum += (c(u) * c(v) * acc).abs();
            }
        }
        sum / (n * n - 1) as f64
    }

    #[test]
    fn constant_clip_has_no_energy() {
        let f = extract_complexity(&synth::constant_clip(64, 48, 3, 25, 90), 2, 27).unwrap();
        assert_eq!([f.se_mean, f.se_max, f.te_mean, f.te_max], [0.0; 4]);
        assert_eq!(f.mean_brightness, 90.0);
        assert_eq!(
            (f.height, f.total_pixels, f.frame_rate, f.n_frames),
            (48.0, 3072.0, 25.0, 3.0)
        );
        assert_eq!((f.preset, f.target_crf), (2.0, 27.0));
        assert!(!f.single_frame);
    }

    #[test]
    fn repeated_frame_has_no_temporal_energy() {
        let one = synth::random_clip(64, 64, 1, 30, 5);
        let frames = vec![one.frames()[0].clone(); 4];
        let clip = one.with_frames(frames).unwrap();
        let f = extract_complexity(&clip, 0, 22).unwrap();
        assert!(f.se_mean > 0.0);
        assert_eq!([f.te_mean, f.te_max, f.te_median, f.te_std], [0.0; 4]);
        assert_eq!(f.se_std, 0.0);
    }

    #[test]
    fn checkerboard_against_naive_dct() {
        const N: usize = COMPLEXITY_BLOCK;
        let board: Vec<u8> = (0..N * N)
            .map(|i| if (i % N + i / N) % 2 == 0 { 200 } else { 40 })
            .collect();
        let flat = vec![120u8; N * N];
        let clip = luma_clip(vec![flat.clone(), board.clone(), flat, board.clone()], N, N);
        let f = extract_complexity(&clip, 0, 22).unwrap();
        let px: Vec<f64> = board.iter().map(|v| *v as f64).collect();
        let e = naive_ac_energy(&px, N);
        // Every transition is |E(board) − 0|.
        assert!((f.te_mean - e).abs() < 1e-9, "{} vs {e}", f.te_mean);
        assert!((f.te_max - e).abs() < 1e-9);
        assert!(f.te_std.abs() < 1e-9);
        assert!((f.se_max - e).abs() < 1e-9);
        assert!((f.se_median - e / 2.0).abs() < 1e-9);
    }

    #[test]
    fn brightness_offset_only_moves_brightness() {
        let base = synth::textured_clip(96, 64, 3, 30, 8);
        let shifted = base
            .map_frames(|f| {
                let mut f = f.clone();
                for v in &mut f.planes[0].data {
                    *v = v.saturating_sub(60).saturating_add(20);
                }
                f
            })
            .unwrap();
        let lifted = shifted
            .map_frames(|f| {
                let mut f = f.clone();
                for v in &mut f.planes[0].data {
                    *v += 15;
                }
                f
            })
            .unwrap();
        // The clamp above keeps the +15 free of clipping.
        assert!(shifted.frames().iter().all(|f| f.luma().data.iter().all(|v| *v <= 240)));
        let a = extract_complexity(&shifted, 1, 30).unwrap();
        let b = extract_complexity(&lifted, 1, 30).unwrap();
        assert_eq!(b.mean_brightness - a.mean_brightness, 15.0);
        let strip = |f: &ComplexityFeatures| {
            let mut v = f.to_vec();
            v.remove(
                ComplexityFeatures::NAMES
                    .iter()
                    .position(|n| *n == "mean_brightness")
                    .unwrap(),
            );
            v
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn short_and_small_clips() {
        let f = extract_complexity(&synth::random_clip(32, 32, 1, 30, 1), 0, 22).unwrap();
        assert!(f.single_frame);
        assert_eq!(f.te_mean, 0.0);
        assert!(extract_complexity(&synth::random_clip(31, 64, 2, 30, 1), 0, 22).is_err());
    }

    #[test]
    fn slice_roundtrip() {
        let f = extract_complexity(&synth::textured_clip(64, 64, 2, 30, 2), 3, 32).unwrap();
        assert_eq!(ComplexityFeatures::from_slice(&f.to_vec()).unwrap(), f);
        assert!(ComplexityFeatures::from_slice(&[1.0]).is_none());
    }
}
