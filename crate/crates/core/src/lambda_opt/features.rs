use serde::{Deserialize, Serialize};

use super::LambdaError;
use crate::codec_gateway::{FrameStats, FrameType};
use crate::rng::fnv1a;
use crate::video_io::ClipMeta;

/// Features of one encode at QP 32 and k = 1 used to predict k.
///
/// Frame classes: key = I/KF, P = P/GF, B = B/ARF. Quality fields hold the
/// per-frame quality columns of the stats (MS-SSIM for real encoders).
/// Bitrates are kbps over the whole clip duration; P/B ratios of a clip
/// without B frames are 0 and `missing_b_frames` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFeatureVector {
    pub width: f64,
    pub height: f64,
    pub bitrate: f64,
    pub key_ms_ssim_y: f64,
    pub key_ms_ssim_u: f64,
    pub key_ms_ssim_v: f64,
    pub p_ms_ssim_y: f64,
    pub p_ms_ssim_u: f64,
    pub p_ms_ssim_v: f64,
    pub b_ms_ssim_y: f64,
    pub b_ms_ssim_u: f64,
    pub b_ms_ssim_v: f64,
    pub p_count: f64,
    pub p_avg_qp: f64,
    pub p_bitrate: f64,
    pub b_count: f64,
    pub b_avg_qp: f64,
    pub b_bitrate: f64,
    pub pb_ratio_y: f64,
    pub pb_ratio_u: f64,
    pub pb_ratio_v: f64,
    pub pb_count: f64,
    pub pb_bitrate: f64,
    /// Mean P frame size over mean B frame size.
    pub pb_size: f64,
    pub bitrate_x_pb_ratio_y: f64,
    pub bitrate_x_pb_ratio_u: f64,
    pub bitrate_x_pb_ratio_v: f64,
    pub bitrate_x_pb_count: f64,
    pub bitrate_x_pb_size: f64,
    pub pb_ratio_y_x_pb_size: f64,
    pub pb_ratio_u_x_pb_size: f64,
    pub pb_ratio_v_x_pb_size: f64,
    pub pb_count_x_pb_size: f64,
    pub pb_ratio_y_x_pb_ratio_u: f64,
    pub pb_ratio_y_x_pb_ratio_v: f64,
    pub pb_ratio_u_x_pb_ratio_v: f64,
    #[serde(default)]
    pub missing_b_frames: bool,
}

macro_rules! feature_list {
    ($($f:ident),* $(,)?) => {
        impl KFeatureVector {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($f)),*];

            pub fn to_vec(&self) -> Vec<f64> {
                vec![$(self.$f),*]
            }
        }
    };
}

feature_list!(
    width,
    height,
    bitrate,
    key_ms_ssim_y,
    key_ms_ssim_u,
    key_ms_ssim_v,
    p_ms_ssim_y,
    p_ms_ssim_u,
    p_ms_ssim_v,
    b_ms_ssim_y,
    b_ms_ssim_u,
    b_ms_ssim_v,
    p_count,
    p_avg_qp,
    p_bitrate,
    b_count,
    b_avg_qp,
    b_bitrate,
    pb_ratio_y,
    pb_ratio_u,
    pb_ratio_v,
    pb_count,
    pb_bitrate,
    pb_size,
    bitrate_x_pb_ratio_y,
    bitrate_x_pb_ratio_u,
    bitrate_x_pb_ratio_v,
    bitrate_x_pb_count,
    bitrate_x_pb_size,
    pb_ratio_y_x_pb_size,
    pb_ratio_u_x_pb_size,
    pb_ratio_v_x_pb_size,
    pb_count_x_pb_size,
    pb_ratio_y_x_pb_ratio_u,
    pb_ratio_y_x_pb_ratio_v,
    pb_ratio_u_x_pb_ratio_v,
);

impl KFeatureVector {
    pub fn schema_hash() -> u64 {
        fnv1a(Self::NAMES.join(",").as_bytes())
    }

    fn products(&self) -> [(f64, f64); 12] {
        let s = self;
        [
            (s.bitrate_x_pb_ratio_y, s.bitrate * s.pb_ratio_y),
            (s.bitrate_x_pb_ratio_u, s.bitrate * s.pb_ratio_u),
            (s.bitrate_x_pb_ratio_v, s.bitrate * s.pb_ratio_v),
            (s.bitrate_x_pb_count, s.bitrate * s.pb_count),
            (s.bitrate_x_pb_size, s.bitrate * s.pb_size),
            (s.pb_ratio_y_x_pb_size, s.pb_ratio_y * s.pb_size),
            (s.pb_ratio_u_x_pb_size, s.pb_ratio_u * s.pb_size),
            (s.pb_ratio_v_x_pb_size, s.pb_ratio_v * s.pb_size),
            (s.pb_count_x_pb_size, s.pb_count * s.pb_size),
            (s.pb_ratio_y_x_pb_ratio_u, s.pb_ratio_y * s.pb_ratio_u),
            (s.pb_ratio_y_x_pb_ratio_v, s.pb_ratio_y * s.pb_ratio_v),
            (s.pb_ratio_u_x_pb_ratio_v, s.pb_ratio_u * s.pb_ratio_v),
        ]
    }

    fn fill_products(&mut self) {
        let [a, b, c, d, e, f, g, h, i, j, k, l] = self.products().map(|p| p.1);
        self.bitrate_x_pb_ratio_y = a;
        self.bitrate_x_pb_ratio_u = b;
        self.bitrate_x_pb_ratio_v = c;
        self.bitrate_x_pb_count = d;
        self.bitrate_x_pb_size = e;
        self.pb_ratio_y_x_pb_size = f;
        self.pb_ratio_u_x_pb_size = g;
        self.pb_ratio_v_x_pb_size = h;
        self.pb_count_x_pb_size = i;
        self.pb_ratio_y_x_pb_ratio_u = j;
        self.pb_ratio_y_x_pb_ratio_v = k;
        self.pb_ratio_u_x_pb_ratio_v = l;
    }

    /// Finite values, non-negative counts and consistent interaction terms.
    pub fn validate(&self) -> Result<(), LambdaError> {
        if let Some((i, _)) = self.to_vec().iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LambdaError::Data(format!("feature `{}` is not finite", Self::NAMES[i])));
        }
        if self.p_count < 0.0 || self.b_count < 0.0 {
            return Err(LambdaError::Data("frame counts must be non-negative".into()));
        }
        for (i, (stored, product)) in self.products().iter().enumerate() {
            if (stored - product).abs() > 1e-9 * (1.0 + product.abs()) {
                let name = Self::NAMES[Self::NAMES.len() - 12 + i];
                return Err(LambdaError::Data(format!(
                    "`{name}` = {stored} but its factors give {product}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct ClassAgg {
    count: f64,
    bits: f64,
    qp: f64,
    q: [f64; 3],
}

impl ClassAgg {
    fn add(&mut self, s: &FrameStats) {
        self.count += 1.0;
        self.bits += s.bits;
        self.qp += s.avg_qp;
        self.q[0] += s.q_y;
        self.q[1] += s.q_u;
        self.q[2] += s.q_v;
    }

    fn mean(&self, total: f64) -> f64 {
        if self.count > 0.0 {
            total / self.count
        } else {
            0.0
        }
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b != 0.0 {
        a / b
    } else {
        0.0
    }
}

/// Aggregate per-frame statistics of one encode into a [`KFeatureVector`].
pub fn extract_k_features(stats: &[FrameStats], meta: &ClipMeta) -> Result<KFeatureVector, LambdaError> {
    if stats.is_empty() {
        return Err(LambdaError::Data(format!(
            "{}: no per-frame statistics",
            meta.source_id
        )));
    }
    let (mut key, mut p, mut b) = (ClassAgg::default(), ClassAgg::default(), ClassAgg::default());
    for s in stats {
        match s.frame_type {
            FrameType::I | FrameType::KF => key.add(s),
            FrameType::P | FrameType::GF => p.add(s),
            FrameType::B | FrameType::ARF => b.add(s),
        }
    }
    let secs = meta.duration_seconds();
    let kbps = |bits: f64| bits / secs / 1000.0;
    let total_bits: f64 = stats.iter().map(|s| s.bits).sum();
    let pq = [p.mean(p.q[0]), p.mean(p.q[1]), p.mean(p.q[2])];
    let bq = [b.mean(b.q[0]), b.mean(b.q[1]), b.mean(b.q[2])];
    let mut f = KFeatureVector {
        width: meta.width as f64,
        height: meta.height as f64,
        bitrate: kbps(total_bits),
        key_ms_ssim_y: key.mean(key.q[0]),
        key_ms_ssim_u: key.mean(key.q[1]),
        key_ms_ssim_v: key.mean(key.q[2]),
        p_ms_ssim_y: pq[0],
        p_ms_ssim_u: pq[1],
        p_ms_ssim_v: pq[2],
        b_ms_ssim_y: bq[0],
        b_ms_ssim_u: bq[1],
        b_ms_ssim_v: bq[2],
        p_count: p.count,
        p_avg_qp: p.mean(p.qp),
        p_bitrate: kbps(p.bits),
        b_count: b.count,
        b_avg_qp: b.mean(b.qp),
        b_bitrate: kbps(b.bits),
        pb_ratio_y: ratio(pq[0], bq[0]),
        pb_ratio_u: ratio(pq[1], bq[1]),
        pb_ratio_v: ratio(pq[2], bq[2]),
        pb_count: ratio(p.count, b.count),
        pb_bitrate: ratio(p.bits, b.bits),
        pb_size: ratio(p.mean(p.bits), b.mean(b.bits)),
        bitrate_x_pb_ratio_y: 0.0,
        bitrate_x_pb_ratio_u: 0.0,
        bitrate_x_pb_ratio_v: 0.0,
        bitrate_x_pb_count: 0.0,
        bitrate_x_pb_size: 0.0,
        pb_ratio_y_x_pb_size: 0.0,
        pb_ratio_u_x_pb_size: 0.0,
        pb_ratio_v_x_pb_size: 0.0,
        pb_count_x_pb_size: 0.0,
        pb_ratio_y_x_pb_ratio_u: 0.0,
        pb_ratio_y_x_pb_ratio_v: 0.0,
        pb_ratio_u_x_pb_ratio_v: 0.0,
        missing_b_frames: b.count == 0.0,
    };
    f.fill_products();
    f.validate()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::FrameRate;

    fn meta(n: usize) -> ClipMeta {
        ClipMeta {
            source_id: "f".into(),
            width: 640,
            height: 360,
            n_frames: n,
            frame_rate: FrameRate::new(30, 1).unwrap(),
        }
    }

    fn row(i: usize, t: FrameType, bits: f64, qp: f64, q: [f64; 3]) -> FrameStats {
        FrameStats {
            frame_index: i,
            frame_type: t,
            bits,
            avg_qp: qp,
            q_y: q[0],
            q_u: q[1],
            q_v: q[2],
        }
    }

    #[test]
    fn p_bitrate_closed_form() {
        let stats: Vec<_> = (0..10).map(|i| row(i, FrameType::P, 1000.0, 30.0, [0.9; 3])).collect();
        let f = extract_k_features(&stats, &meta(30)).unwrap();
        // 10 000 bits over one second.
        assert_eq!(f.p_bitrate, 10.0);
        assert_eq!(f.p_count, 10.0);
    }

    #[test]
    fn intra_only_flags_missing_b() {
        let stats: Vec<_> = (0..4).map(|i| row(i, FrameType::I, 5000.0, 25.0, [0.99; 3])).collect();
        let f = extract_k_features(&stats, &meta(4)).unwrap();
        assert!(f.missing_b_frames);
        assert_eq!((f.p_count, f.b_count, f.pb_ratio_y, f.pb_size), (0.0, 0.0, 0.0, 0.0));
        assert!(extract_k_features(&[], &meta(4)).is_err());
    }

    #[test]
    fn golden_record() {
        let stats = vec![
            row(0, FrameType::I, 6000.0, 28.0, [0.99, 0.995, 0.996]),
            row(1, FrameType::B, 1000.0, 34.0, [0.95, 0.97, 0.975]),
            row(2, FrameType::P, 2000.0, 32.0, [0.96, 0.98, 0.982]),
            row(3, FrameType::B, 1200.0, 35.0, [0.94, 0.965, 0.97]),
            row(4, FrameType::P, 2400.0, 31.0, [0.965, 0.981, 0.985]),
            row(5, FrameType::ARF, 800.0, 36.0, [0.93, 0.96, 0.968]),
            row(6, FrameType::GF, 1600.0, 33.0, [0.955, 0.978, 0.98]),
        ];
        let f = extract_k_features(&stats, &meta(7)).unwrap();
        let golden = GOLDEN;
        assert_eq!(golden.len(), KFeatureVector::NAMES.len());
        for ((name, got), want) in KFeatureVector::NAMES.iter().zip(f.to_vec()).zip(golden) {
            assert!(
                (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                "{name}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn tampered_product_is_rejected() {
        let stats = vec![
            row(0, FrameType::P, 100.0, 30.0, [0.9; 3]),
            row(1, FrameType::B, 50.0, 32.0, [0.8; 3]),
        ];
        let mut f = extract_k_features(&stats, &meta(2)).unwrap();
        f.bitrate_x_pb_size += 1.0;
        assert!(f.validate().is_err());
    }

    // Computed independently from the row table above.
    const GOLDEN: [f64; 36] = [
        640.0,
        360.0,
        64.28571428571428,
        0.99,
        0.995,
        0.996,
        0.96,
        0.9796666666666667,
        0.9823333333333334,
        0.94,
        0.965,
        0.971,
        3.0,
        32.0,
        25.714285714285715,
        3.0,
        35.0,
        12.857142857142858,
        1.0212765957446808,
        1.0151986183074266,
        1.0116718159972538,
        1.0,
        2.0,
        2.0,
        65.65349544072947,
        65.26276831976313,
        65.03604531410916,
        64.28571428571428,
        128.57142857142856,
        2.0425531914893615,
        2.0303972366148533,
        2.0233436319945075,
        2.0,
        1.0367985889097122,
        1.0331967482525144,
        1.027047829780977,
    ];
}
