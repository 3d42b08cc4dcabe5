use crate::dct::Dct;
use crate::video_io::{Clip, Plane};

/// Spatial block size.
pub const WIENER_BLOCK: usize = 8;
/// Spatial hop between blocks (50% overlap).
pub const WIENER_STRIDE: usize = 4;
/// Frames per block (previous, current, next).
pub const WIENER_TEMPORAL: usize = 3;

const B: usize = WIENER_BLOCK;
const BB: usize = B * B;

/// Block origins along one axis: every `WIENER_STRIDE`, plus a final block
/// flush with the edge.
fn origins(len: usize) -> Vec<usize> {
    if len <= B {
        return vec![0];
    }
    let mut v: Vec<usize> = (0..=len - B).step_by(WIENER_STRIDE).collect();
    if *v.last().unwrap() != len - B {
        v.push(len - B);
    }
    v
}

/// 2-D DCT of every block of one plane, in origin order.
fn spatial_coeffs(p: &Plane, xs: &[usize], ys: &[usize], dct: &Dct) -> Vec<[f64; BB]> {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &oy in ys {
        for &ox in xs {
            let mut b = [0.0; BB];
            for y in 0..B {
                for x in 0..B {
                    b[y * B + x] = p.get_clamped((ox + x) as isize, (oy + y) as isize) as f64;
                }
            }
            dct.forward_2d(&mut b);
            out.push(b);
        }
    }
    out
}

fn denoise_plane(frames: &[&Plane], s: f64, dct: &Dct, dct_t: &Dct) -> Vec<Plane> {
    let (w, h) = (frames[0].width, frames[0].height);
    let (xs, ys) = (origins(w), origins(h));
    let n = frames.len();
    let noise_power = s * s;
    let coeffs: Vec<Vec<[f64; BB]>> = frames.iter().map(|p| spatial_coeffs(p, &xs, &ys, dct)).collect();
    let mut out = Vec::with_capacity(n);
    let mut cube = [0.0; WIENER_TEMPORAL * BB];
    for t in 0..n {
        let window = [t.saturating_sub(1), t, (t + 1).min(n - 1)];
        let mut acc = vec![0.0; w * h];
        let mut weight = vec![0u32; w * h];
        for (bi, (oy, ox)) in ys.iter().flat_map(|y| xs.iter().map(move |x| (*y, *x))).enumerate() {
            for (slot, &f) in window.iter().enumerate() {
                cube[slot * BB..(slot + 1) * BB].copy_from_slice(&coeffs[f][bi]);
            }
            dct_t.forward_across(&mut cube, BB);
            for c in cube.iter_mut().skip(1) {
                let e = *c * *c;
                *c *= if e > noise_power { (e - noise_power) / e } else { 0.0 };
            }
            dct_t.inverse_across(&mut cube, BB);
            let mid = &mut cube[BB..2 * BB];
            dct.inverse_2d(mid);
            for y in 0..B.min(h - oy) {
                for x in 0..B.min(w - ox) {
                    let i = (oy + y) * w + ox + x;
                    acc[i] += mid[y * B + x];
                    weight[i] += 1;
                }
            }
        }
        let data = acc
            .iter()
            .zip(&weight)
            .map(|(a, k)| (a / *k as f64).round().clamp(0.0, 255.0) as u8)
            .collect();
        out.push(Plane::new(w, h, data));
    }
    out
}

/// Overlapped 8×8×3 block-DCT Wiener filter with assumed noise standard
/// deviation `strength`.
///
/// Every coefficient except the block DC is scaled by
/// `max(0, |C|² − s²) / |C|²` (orthonormal transform, so white noise of
/// variance s² has variance s² in each coefficient). Blocks hop by 4 pixels
/// and are averaged uniformly; the temporal window repeats the first and
/// last frames. Strength 0 returns the input unchanged.
pub fn wiener3d_denoise(clip: &Clip, strength: f64) -> Clip {
    assert!(
        strength >= 0.0 && strength.is_finite(),
        "strength must be finite and non-negative"
    );
    if strength == 0.0 {
        return clip.clone();
    }
    let dct = Dct::new(B);
    let dct_t = Dct::new(WIENER_TEMPORAL);
    let mut planes: Vec<Vec<Plane>> = Vec::with_capacity(3);
    for pi in 0..3 {
        let src: Vec<&Plane> = clip.frames().iter().map(|f| &f.planes[pi]).collect();
        planes.push(denoise_plane(&src, strength, &dct, &dct_t));
    }
    let mut iters: Vec<_> = planes.into_iter().map(|v| v.into_iter()).collect();
    let frames = clip
        .frames()
        .iter()
        .map(|f| {
            let mut g = f.clone();
            for (pi, it) in iters.iter_mut().enumerate() {
                g.planes[pi] = it.next().expect("one plane per frame");
            }
            g
        })
        .collect();
    clip.with_frames(frames).expect("geometry unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;
    use crate::video_io::{add_gaussian_noise, synth};

    fn ac_energy(p: &Plane, ox: usize, oy: usize, dct: &Dct) -> f64 {
        let mut b = [0.0; BB];
        for y in 0..B {
            for x in 0..B {
                b[y * B + x] = p.get(ox + x, oy + y) as f64;
            }
        }
        dct.forward_2d(&mut b);
        b[1..].iter().map(|c| c * c).sum()
    }

    #[test]
    fn zero_strength_is_identity() {
        let c = synth::random_clip(24, 16, 3, 30, 1);
        assert_eq!(wiener3d_denoise(&c, 0.0), c);
    }

    #[test]
    fn constant_clip_is_fixed_point() {
        let c = synth::constant_clip(20, 12, 4, 30, 90);
        assert_eq!(wiener3d_denoise(&c, 25.0), c);
    }

    #[test]
    fn noisy_gray_is_cleaned() {
        let clean = synth::constant_clip(64, 64, 4, 30, 128);
        let noisy = add_gaussian_noise(&clean, 10.0, 3).unwrap();
        let out = wiener3d_denoise(&noisy, 10.0);
        assert!(psnr(&clean, &out).unwrap() > psnr(&clean, &noisy).unwrap() + 3.0);
        let dct = Dct::new(B);
        for (a, b) in noisy.frames().iter().zip(out.frames()) {
            for oy in (0..64).step_by(B) {
                for ox in (0..64).step_by(B) {
                    assert!(ac_energy(b.luma(), ox, oy, &dct) <= ac_energy(a.luma(), ox, oy, &dct));
                }
            }
        }
    }

    #[test]
    fn block_origins_cover_edges() {
        assert_eq!(origins(8), vec![0]);
        assert_eq!(origins(5), vec![0]);
        assert_eq!(origins(16), vec![0, 4, 8]);
        assert_eq!(origins(18), vec![0, 4, 8, 10]);
    }

    #[test]
    fn odd_sizes_and_short_clips() {
        let c = synth::textured_clip(37, 21, 1, 30, 2);
        let out = wiener3d_denoise(&c, 5.0);
        assert_eq!((out.width(), out.height(), out.len()), (37, 21, 1));
    }
}
