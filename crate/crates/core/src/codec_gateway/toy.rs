//! Intra-only 8×8 DCT coder used to study how quantization coring interacts
//! with denoising. Rate is the empirical entropy of the quantized levels
//! (one distribution per coefficient position, separately for luma and
//! chroma) plus a small per-frame header, not a real bitstream.

use web_time::Instant;

use super::{CodecError, EncodeResult};
use crate::dct::Dct;
use crate::video_io::{Clip, Plane, VideoFrame};

/// Fixed cost per frame so that even an all-zero frame has a positive rate.
pub const TOY_FRAME_HEADER_BITS: f64 = 8.0;

const B: usize = 8;
const RATE_TOLERANCE: f64 = 0.02;
const STEP_MIN: f64 = 0.05;
const MAX_BISECTIONS: usize = 80;

#[derive(Debug, Clone)]
pub struct ToyEncodeResult {
    pub decoded: Clip,
    pub bitrate_kbps: f64,
    pub target_kbps: f64,
    /// Quantizer step in orthonormal-DCT units.
    pub step: f64,
    pub wall_time: f64,
    /// Target below the all-zero-levels rate; the floor rate is returned.
    pub at_floor: bool,
    /// Target above the finest quantizer's rate.
    pub at_ceiling: bool,
}

impl ToyEncodeResult {
    pub fn into_encode_result(self) -> EncodeResult {
        EncodeResult {
            bitrate_kbps: self.bitrate_kbps,
            wall_time: self.wall_time,
            decoded: Some(self.decoded),
            analytic_quality: None,
            per_frame_stats: None,
        }
    }

    pub fn within_tolerance(&self) -> bool {
        (self.bitrate_kbps / self.target_kbps - 1.0).abs() <= RATE_TOLERANCE
    }
}

struct PlaneLayout {
    frame: usize,
    plane: usize,
    width: usize,
    height: usize,
    padded_w: usize,
    padded_h: usize,
    start: usize,
}

struct Analysis {
    layouts: Vec<PlaneLayout>,
    coeffs: Vec<f64>,
    /// Coefficient values per (luma/chroma, position) context, sorted.
    by_context: Vec<Vec<f64>>,
    max_abs: f64,
}

fn analyse(clip: &Clip, dct: &Dct) -> Analysis {
    let mut layouts = Vec::new();
    let mut coeffs = Vec::new();
    let mut block = [0.0; B * B];
    for (fi, frame) in clip.frames().iter().enumerate() {
        for (pi, plane) in frame.planes.iter().enumerate() {
            let (w, h) = (plane.width, plane.height);
            let (pw, ph) = (w.div_ceil(B) * B, h.div_ceil(B) * B);
            layouts.push(PlaneLayout {
                frame: fi,
                plane: pi,
                width: w,
                height: h,
                padded_w: pw,
                padded_h: ph,
                start: coeffs.len(),
            });
            for by in (0..ph).step_by(B) {
                for bx in (0..pw).step_by(B) {
                    for y in 0..B {
                        for x in 0..B {
                            let v = plane.get((bx + x).min(w - 1), (by + y).min(h - 1));
                            block[y * B + x] = v as f64 - 128.0;
                        }
                    }
                    dct.forward_2d(&mut block);
                    coeffs.extend_from_slice(&block);
                }
            }
        }
    }
    let mut by_context = vec![Vec::new(); 2 * B * B];
    for (li, lay) in layouts.iter().enumerate() {
        let end = layouts.get(li + 1).map_or(coeffs.len(), |l| l.start);
        let base = if lay.plane == 0 { 0 } else { B * B };
        for (i, &c) in coeffs[lay.start..end].iter().enumerate() {
            by_context[base + i % (B * B)].push(c);
        }
    }
    for v in &mut by_context {
        v.sort_by(f64::total_cmp);
    }
    let max_abs = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    Analysis {
        layouts,
        coeffs,
        by_context,
        max_abs,
    }
}

fn level(c: f64, step: f64) -> i64 {
    (c / step).round() as i64
}

/// Σ over contexts of N·H(levels) in bits.
fn entropy_bits(a: &Analysis, step: f64) -> f64 {
    let mut bits = 0.0;
    for vals in &a.by_context {
        let n = vals.len() as f64;
        if n == 0.0 {
            continue;
        }
        let mut sum_clogc = 0.0;
        let mut run = 0usize;
        let mut cur = i64::MIN;
        for &v in vals {
            let l = level(v, step);
            if l != cur {
                if run > 0 {
                    sum_clogc += run as f64 * (run as f64).log2();
                }
                cur = l;
                run = 0;
            }
            run += 1;
        }
        sum_clogc += run as f64 * (run as f64).log2();
        bits += n * n.log2() - sum_clogc;
    }
    bits.max(0.0)
}

fn reconstruct(clip: &Clip, a: &Analysis, dct: &Dct, step: f64) -> Result<Clip, CodecError> {
    let mut planes: Vec<Vec<Option<Plane>>> = vec![vec![None, None, None]; clip.len()];
    let mut block = [0.0; B * B];
    for lay in &a.layouts {
        let mut buf = vec![0.0; lay.padded_w * lay.padded_h];
        let mut idx = lay.start;
        for by in (0..lay.padded_h).step_by(B) {
            for bx in (0..lay.padded_w).step_by(B) {
                for (k, v) in block.iter_mut().enumerate() {
                    *v = level(a.coeffs[idx + k], step) as f64 * step;
                }
                idx += B * B;
                dct.inverse_2d(&mut block);
                for y in 0..B {
                    let row = (by + y) * lay.padded_w + bx;
                    buf[row..row + B].copy_from_slice(&block[y * B..(y + 1) * B]);
                }
            }
        }
        let mut data = Vec::with_capacity(lay.width * lay.height);
        for y in 0..lay.height {
            for x in 0..lay.width {
                data.push((buf[y * lay.padded_w + x] + 128.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        planes[lay.frame][lay.plane] = Some(Plane::new(lay.width, lay.height, data));
    }
    let frames = planes
        .into_iter()
        .zip(clip.frames())
        .map(|(p, src)| {
            let [a, b, c]: [Option<Plane>; 3] = p.try_into().expect("three planes");
            VideoFrame::new(src.sampling, [a.unwrap(), b.unwrap(), c.unwrap()])
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(clip.with_frames(frames)?)
}

/// Encode `clip` so that its entropy rate lands within 2% of
/// `target_kbps`, by bisection on the log quantizer step.
pub fn toy_intra_encode(clip: &Clip, target_kbps: f64) -> Result<ToyEncodeResult, CodecError> {
    if !(target_kbps > 0.0 && target_kbps.is_finite()) {
        return Err(CodecError::Spec(format!(
            "target bitrate must be positive, got {target_kbps}"
        )));
    }
    let t0 = Instant::now();
    let dct = Dct::new(B);
    let a = analyse(clip, &dct);
    let seconds = clip.duration_seconds();
    let header = TOY_FRAME_HEADER_BITS * clip.len() as f64;
    let rate = |step: f64| (entropy_bits(&a, step) + header) / seconds / 1000.0;

    // Every level is zero above this step.
    let step_max = 2.0 * a.max_abs + 1.0;
    let (lo_rate, hi_rate) = (rate(step_max), rate(STEP_MIN));
    let (mut at_floor, mut at_ceiling) = (false, false);
    let step = if hi_rate <= target_kbps * (1.0 + RATE_TOLERANCE) {
        at_ceiling = hi_rate < target_kbps * (1.0 - RATE_TOLERANCE);
        STEP_MIN
    } else if lo_rate >= target_kbps * (1.0 - RATE_TOLERANCE) {
        at_floor = lo_rate > target_kbps * (1.0 + RATE_TOLERANCE);
        step_max
    } else {
        let (mut lo, mut hi) = (STEP_MIN.ln(), step_max.ln());
        let mut best = (f64::INFINITY, step_max);
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let r = rate(mid.exp());
            let err = (r / target_kbps - 1.0).abs();
            if err < best.0 {
                best = (err, mid.exp());
            }
            if err <= RATE_TOLERANCE {
                break;
            }
            if r > target_kbps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best.1
    };
    let decoded = reconstruct(clip, &a, &dct, step)?;
    Ok(ToyEncodeResult {
        decoded,
        bitrate_kbps: rate(step),
        target_kbps,
        step,
        wall_time: t0.elapsed().as_secs_f64().max(1e-9),
        at_floor,
        at_ceiling,
    })
}
