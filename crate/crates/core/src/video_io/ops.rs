use super::frame::{Clip, Plane, VideoFrame};
use super::VideoError;
use crate::rng::GaussianSource;

/// Smallest luma height a downsampled proxy targets.
pub const PROXY_HEIGHT: usize = 144;
/// Sources above this height are halved instead of going to the 144-line floor.
pub const PROXY_HALVING_ABOVE: usize = 720;

fn round_even(v: f64) -> usize {
    ((v / 2.0).round() as usize * 2).max(2)
}

/// Proxy resolution for lambda search on a downsampled clip.
///
/// Sources up to 720 lines go to 144 lines with aspect preserved; taller
/// sources are halved. Both output dimensions are rounded to even. Sources at
/// or below 144 lines are returned unchanged (never upscaled).
pub fn proxy_resolution(width: usize, height: usize) -> Result<(usize, usize), VideoError> {
    if width < 16 || height < 16 {
        return Err(VideoError::Degenerate { width, height });
    }
    if height <= PROXY_HEIGHT {
        return Ok((width, height));
    }
    if height <= PROXY_HALVING_ABOVE {
        let w = round_even(width as f64 * PROXY_HEIGHT as f64 / height as f64);
        Ok((w, PROXY_HEIGHT))
    } else {
        Ok((round_even(width as f64 / 2.0), round_even(height as f64 / 2.0)))
    }
}

fn halve_plane(src: &Plane, out_w: usize, out_h: usize) -> Plane {
    let mut data = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let (y0, y1) = (2 * y as isize, 2 * y as isize + 1);
        for x in 0..out_w {
            let (x0, x1) = (2 * x as isize, 2 * x as isize + 1);
            let sum = src.get_clamped(x0, y0) as u32
                + src.get_clamped(x1, y0) as u32
                + src.get_clamped(x0, y1) as u32
                + src.get_clamped(x1, y1) as u32;
            data.push(((sum + 2) / 4) as u8);
        }
    }
    Plane::new(out_w, out_h, data)
}

/// Halve both dimensions by 2×2 box averaging (rounded).
///
/// An odd trailing luma row/column is cropped first. Chroma planes are
/// resampled to the geometry implied by the new luma size.
pub fn downsample_half(frame: &VideoFrame) -> Result<VideoFrame, VideoError> {
    let (w, h) = (frame.width() / 2, frame.height() / 2);
    if w == 0 || h == 0 {
        return Err(VideoError::Degenerate {
            width: frame.width(),
            height: frame.height(),
        });
    }
    let (cw, ch) = frame.sampling.chroma_dims(w, h);
    Ok(VideoFrame {
        sampling: frame.sampling,
        planes: [
            halve_plane(&frame.planes[0], w, h),
            halve_plane(&frame.planes[1], cw, ch),
            halve_plane(&frame.planes[2], cw, ch),
        ],
    })
}

/// Box-filter resampling weights along one axis: for every output index the
/// list of (source index, weight) pairs, weights summing to one.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let start = o as f64 * scale;
            let end = start + scale;
            let mut taps = Vec::new();
            let mut i = start.floor() as usize;
            while (i as f64) < end && i < src {
                let lo = start.max(i as f64);
                let hi = end.min(i as f64 + 1.0);
                if hi > lo {
                    taps.push((i, (hi - lo) / scale));
                }
                i += 1;
            }
            taps
        })
        .collect()
}

fn resize_plane_area(src: &Plane, out_w: usize, out_h: usize) -> Plane {
    let wx = area_weights(src.width, out_w);
    let wy = area_weights(src.height, out_h);
    let mut tmp = vec![0.0f64; out_w * src.height];
    for y in 0..src.height {
        let row = src.row(y);
        for (x, taps) in wx.iter().enumerate() {
            tmp[y * out_w + x] = taps.iter().map(|&(i, w)| row[i] as f64 * w).sum();
        }
    }
    let mut data = Vec::with_capacity(out_w * out_h);
    for taps in &wy {
        for x in 0..out_w {
            let v: f64 = taps.iter().map(|&(j, w)| tmp[j * out_w + x] * w).sum();
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Plane::new(out_w, out_h, data)
}

/// Area-average resampling of a frame to an arbitrary smaller size.
pub fn resize_area(frame: &VideoFrame, width: usize, height: usize) -> Result<VideoFrame, VideoError> {
    if width == 0 || height == 0 || width > frame.width() || height > frame.height() {
        return Err(VideoError::Degenerate { width, height });
    }
    let (cw, ch) = frame.sampling.chroma_dims(width, height);
    Ok(VideoFrame {
        sampling: frame.sampling,
        planes: [
            resize_plane_area(&frame.planes[0], width, height),
            resize_plane_area(&frame.planes[1], cw, ch),
            resize_plane_area(&frame.planes[2], cw, ch),
        ],
    })
}

/// Downscale by repeated halving while at least 2× larger than the target,
/// then area-resample the remainder.
pub fn downscale_to(frame: &VideoFrame, width: usize, height: usize) -> Result<VideoFrame, VideoError> {
    let mut cur = frame.clone();
    while cur.width() >= 2 * width && cur.height() >= 2 * height {
        cur = downsample_half(&cur)?;
    }
    if cur.width() == width && cur.height() == height {
        Ok(cur)
    } else {
        resize_area(&cur, width, height)
    }
}

/// Gaussian noise standard deviation whose MSE gives `target_psnr` dB against
/// an 8-bit peak.
pub fn sigma_for_target_psnr(target_psnr: f64) -> Result<f64, VideoError> {
    if !(target_psnr > 0.0) || !target_psnr.is_finite() {
        return Err(VideoError::InvalidPsnr(target_psnr));
    }
    Ok(255.0 * 10f64.powf(-target_psnr / 20.0))
}

/// Perturb every sample of every plane by i.i.d. N(0, sigma²).
///
/// Variates come from [`GaussianSource`] (ChaCha8 + Box–Muller) seeded with
/// `seed`, consumed frame by frame, plane by plane, in raster order. Results
/// are rounded half away from zero and clamped to [0, 255].
pub fn add_gaussian_noise(clip: &Clip, sigma: f64, seed: u64) -> Result<Clip, VideoError> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(VideoError::InvalidSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(clip.clone());
    }
    let mut gauss = GaussianSource::new(seed);
    clip.map_frames(|frame| {
        let mut out = frame.clone();
        for plane in &mut out.planes {
            for s in &mut plane.data {
                let v = *s as f64 + sigma * gauss.next();
                *s = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        out
    })
}

/// Mean of all luma samples across the clip.
pub fn mean_brightness(clip: &Clip) -> f64 {
    let mut sum = 0u64;
    let mut count = 0u64;
    for f in clip.frames() {
        sum += f.luma().data.iter().map(|&v| v as u64).sum::<u64>();
        count += f.luma().data.len() as u64;
    }
    sum as f64 / count as f64
}
