//! Deterministic synthetic clips for tests, demos and desk-scale experiments.

use rand::Rng;

use super::frame::{ChromaSampling, Clip, FrameRate, Plane, VideoFrame};
use crate::rng::seeded;

fn rate(fps: u32) -> FrameRate {
    FrameRate {
        num: fps.max(1),
        den: 1,
    }
}

/// 4:2:0 clip with every luma sample at `value` and neutral chroma.
pub fn constant_clip(width: usize, height: usize, frames: usize, fps: u32, value: u8) -> Clip {
    let f = VideoFrame::filled(width, height, ChromaSampling::Cs420, value, 128);
    Clip::new(vec![f; frames.max(1)], rate(fps), "constant").expect("valid geometry")
}

/// 4:2:0 clip of independent uniform bytes.
pub fn random_clip(width: usize, height: usize, frames: usize, fps: u32, seed: u64) -> Clip {
    random_clip_with(width, height, frames, fps, ChromaSampling::Cs420, seed)
}

pub fn random_clip_with(
    width: usize,
    height: usize,
    frames: usize,
    fps: u32,
    sampling: ChromaSampling,
    seed: u64,
) -> Clip {
    let mut rng = seeded(seed);
    let (cw, ch) = sampling.chroma_dims(width, height);
    let mut plane = |w: usize, h: usize| {
        let data = (0..w * h).map(|_| rng.random::<u8>()).collect();
        Plane::new(w, h, data)
    };
    let frames = (0..frames.max(1))
        .map(|_| VideoFrame {
            sampling,
            planes: [plane(width, height), plane(cw, ch), plane(cw, ch)],
        })
        .collect();
    Clip::new(frames, rate(fps), format!("random-{seed}")).expect("valid geometry")
}

/// Natural-looking moving content: a soft gradient, oriented gratings of a
/// few frequencies drifting over time, and hard-edged moving rectangles.
///
/// Parameters are drawn from `seed`, so different seeds give different
/// scenes with a similar mix of smooth areas, texture and edges.
pub fn textured_clip(width: usize, height: usize, frames: usize, fps: u32, seed: u64) -> Clip {
    use std::f64::consts::TAU;
    let mut rng = seeded(seed);
    let gratings: Vec<(f64, f64, f64, f64, f64)> = (0..4)
        .map(|i| {
            let period = [40.0, 17.0, 9.0, 5.0][i] * rng.random_range(0.8..1.25);
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let amp = [22.0, 12.0, 7.0, 4.0][i] * rng.random_range(0.7..1.3);
            let speed = rng.random_range(-0.6..0.6);
            let phase = rng.random_range(0.0..TAU);
            (
                TAU / period * theta.cos(),
                TAU / period * theta.sin(),
                amp,
                speed,
                phase,
            )
        })
        .collect();
    let rects: Vec<(f64, f64, f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..width as f64),
                rng.random_range(0.0..height as f64),
                rng.random_range(0.1..0.3) * width as f64,
                rng.random_range(0.1..0.3) * height as f64,
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.0..1.0),
                rng.random_range(-45.0..45.0),
            )
        })
        .collect();
    let gx = rng.random_range(-30.0..30.0) / width as f64;
    let gy = rng.random_range(-30.0..30.0) / height as f64;
    let (cw, ch) = ChromaSampling::Cs420.chroma_dims(width, height);

    let frames = (0..frames.max(1))
        .map(|t| {
            let t = t as f64;
            let mut y = Vec::with_capacity(width * height);
            for py in 0..height {
                for px in 0..width {
                    let (xf, yf) = (px as f64, py as f64);
                    let mut v = 120.0 + gx * xf + gy * yf;
                    for &(kx, ky, amp, speed, phase) in &gratings {
                        v += amp * (kx * xf + ky * yf + phase + speed * t).sin();
                    }
                    for &(rx, ry, rw, rh, vx, vy, level) in &rects {
                        let cx = (rx + vx * t).rem_euclid(width as f64);
                        let cy = (ry + vy * t).rem_euclid(height as f64);
                        if (xf - cx).abs() < rw / 2.0 && (yf - cy).abs() < rh / 2.0 {
                            v += level;
                        }
                    }
                    y.push(v.round().clamp(0.0, 255.0) as u8);
                }
            }
            let mut u = Vec::with_capacity(cw * ch);
            let mut v = Vec::with_capacity(cw * ch);
            for py in 0..ch {
                for px in 0..cw {
                    let (xf, yf) = (px as f64 / cw as f64, py as f64 / ch as f64);
                    u.push((128.0 + 20.0 * (TAU * (xf + 0.01 * t)).sin()).round() as u8);
                    v.push((128.0 + 15.0 * (TAU * (yf - 0.01 * t)).cos()).round() as u8);
                }
            }
            VideoFrame {
                sampling: ChromaSampling::Cs420,
                planes: [
                    Plane::new(width, height, y),
                    Plane::new(cw, ch, u),
                    Plane::new(cw, ch, v),
                ],
            }
        })
        .collect();
    Clip::new(frames, rate(fps), format!("textured-{seed}")).expect("valid geometry")
}
