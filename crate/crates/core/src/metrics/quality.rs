use crate::video_io::{Clip, Plane};

use super::MetricsError;

/// PSNR reported for identical inputs (infinite PSNR is not serializable).
pub const PSNR_CAP: f64 = 99.0;

/// Minimum luma width/height for five dyadic MS-SSIM scales.
pub const MS_SSIM_MIN_DIM: usize = 176;

const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const PEAK: f64 = 255.0;

fn check_shapes(a: &Clip, b: &Clip) -> Result<(), MetricsError> {
    if a.len() != b.len() || a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::ShapeMismatch {
            reference: (a.width(), a.height(), a.len()),
            test: (b.width(), b.height(), b.len()),
        });
    }
    Ok(())
}

/// Mean squared luma error pooled over every sample of the clip.
pub fn luma_mse(reference: &Clip, test: &Clip) -> Result<f64, MetricsError> {
    check_shapes(reference, test)?;
    let mut sse = 0u64;
    let mut n = 0u64;
    for (fa, fb) in reference.frames().iter().zip(test.frames()) {
        for (&x, &y) in fa.luma().data.iter().zip(&fb.luma().data) {
            let d = x as i64 - y as i64;
            sse += (d * d) as u64;
        }
        n += fa.luma().data.len() as u64;
    }
    Ok(sse as f64 / n as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP)
    }
}

/// Luma PSNR with MSE pooled over the whole clip; identical clips give
/// [`PSNR_CAP`].
pub fn psnr(reference: &Clip, test: &Clip) -> Result<f64, MetricsError> {
    Ok(psnr_from_mse(luma_mse(reference, test)?))
}

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable "valid" filtering of an image with the Gaussian window.
fn filter_valid(img: &[f64], w: usize, h: usize, win: &[f64; WINDOW]) -> (Vec<f64>, usize, usize) {
    let ow = w + 1 - WINDOW;
    let oh = h + 1 - WINDOW;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &img[y * w..(y + 1) * w];
        for x in 0..ow {
            let mut acc = 0.0;
            for k in 0..WINDOW {
                acc += win[k] * row[x + k];
            }
            tmp[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for k in 0..WINDOW {
                acc += win[k] * tmp[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    (out, ow, oh)
}

/// Mean SSIM and mean contrast-structure term over all valid windows.
fn ssim_cs(x: &[f64], y: &[f64], w: usize, h: usize, win: &[f64; WINDOW]) -> (f64, f64) {
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (mx, ow, oh) = filter_valid(x, w, h, win);
    let (my, _, _) = filter_valid(y, w, h, win);
    let (sxx, _, _) = filter_valid(&xx, w, h, win);
    let (syy, _, _) = filter_valid(&yy, w, h, win);
    let (sxy, _, _) = filter_valid(&xy, w, h, win);
    let n = (ow * oh) as f64;
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    for i in 0..ow * oh {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cov = sxy[i] - ux * uy;
        let cs = (2.0 * cov + c2) / (vx + vy + c2);
        let l = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        cs_sum += cs;
        ssim_sum += l * cs;
    }
    (ssim_sum / n, cs_sum / n)
}

fn halve(img: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let (ow, oh) = (w / 2, h / 2);
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let i = 2 * y * w + 2 * x;
            out.push(0.25 * (img[i] + img[i + 1] + img[i + w] + img[i + w + 1]));
        }
    }
    (out, ow, oh)
}

/// Five-scale MS-SSIM of two luma planes.
///
/// Negative per-scale terms are clamped to zero before weighting, so the
/// score lies in [0, 1].
pub fn ms_ssim_plane(a: &Plane, b: &Plane) -> f64 {
    let win = gaussian_window();
    let mut x: Vec<f64> = a.data.iter().map(|&v| v as f64).collect();
    let mut y: Vec<f64> = b.data.iter().map(|&v| v as f64).collect();
    let (mut w, mut h) = (a.width, a.height);
    let mut score = 1.0;
    for (scale, &weight) in MS_SSIM_WEIGHTS.iter().enumerate() {
        let (ssim, cs) = ssim_cs(&x, &y, w, h, &win);
        let term = if scale + 1 == MS_SSIM_WEIGHTS.len() { ssim } else { cs };
        score *= term.max(0.0).powf(weight);
        if scale + 1 < MS_SSIM_WEIGHTS.len() {
            let (nx, nw, nh) = halve(&x, w, h);
            let (ny, _, _) = halve(&y, w, h);
            x = nx;
            y = ny;
            w = nw;
            h = nh;
        }
    }
    score
}

/// Luma MS-SSIM averaged over frames.
pub fn ms_ssim(reference: &Clip, test: &Clip) -> Result<f64, MetricsError> {
    check_shapes(reference, test)?;
    if reference.width() < MS_SSIM_MIN_DIM || reference.height() < MS_SSIM_MIN_DIM {
        return Err(MetricsError::TooSmall {
            width: reference.width(),
            height: reference.height(),
            min: MS_SSIM_MIN_DIM,
        });
    }
    let sum: f64 = reference
        .frames()
        .iter()
        .zip(test.frames())
        .map(|(a, b)| ms_ssim_plane(a.luma(), b.luma()))
        .sum();
    Ok(sum / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::{add_gaussian_noise, synth};

    #[test]
    fn psnr_cases() {
        let a = synth::constant_clip(16, 16, 2, 30, 100);
        let b = synth::constant_clip(16, 16, 2, 30, 108);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP);
        let p = psnr(&a, &b).unwrap();
        assert!((p - 10.0 * (255f64 * 255.0 / 64.0).log10()).abs() < 1e-12);
        assert!((p - 30.069).abs() < 1e-3);
        assert_eq!(p, psnr(&b, &a).unwrap());
    }

    #[test]
    fn shape_mismatch() {
        let a = synth::constant_clip(16, 16, 2, 30, 100);
        let b = synth::constant_clip(16, 16, 3, 30, 100);
        assert!(matches!(psnr(&a, &b), Err(MetricsError::ShapeMismatch { .. })));
    }

    #[test]
    fn ms_ssim_identity_symmetry_and_size() {
        let a = synth::textured_clip(176, 176, 2, 30, 3);
        let b = add_gaussian_noise(&a, 6.0, 1).unwrap();
        assert_eq!(ms_ssim(&a, &a).unwrap(), 1.0);
        assert_eq!(ms_ssim(&a, &b).unwrap(), ms_ssim(&b, &a).unwrap());
        let small = synth::constant_clip(160, 200, 1, 30, 1);
        match ms_ssim(&small, &small) {
            Err(MetricsError::TooSmall { min, .. }) => assert_eq!(min, 176),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ms_ssim_decreases_with_noise() {
        let a = synth::textured_clip(192, 176, 2, 30, 4);
        let lo = add_gaussian_noise(&a, 3.0, 9).unwrap();
        let hi = add_gaussian_noise(&a, 12.0, 9).unwrap();
        let (s_lo, s_hi) = (ms_ssim(&a, &lo).unwrap(), ms_ssim(&a, &hi).unwrap());
        assert!(s_lo > s_hi && s_hi > 0.0 && s_lo < 1.0, "{s_lo} {s_hi}");
    }
}
