//! One encode interface over external encoder processes, a synthetic
//! analytic codec and a toy DCT intra coder.

#[cfg(feature = "external")]
mod external;
mod profile;
mod stats;
mod synthetic;
mod toy;

#[cfg(feature = "external")]
pub use external::{run_external_encode, ExternalGateway, TMPDIR_ENV};
pub use profile::{
    builtin_profile, builtin_profiles, render_template, template_placeholders, EncodeSettings, EncoderProfile,
    Placeholder,
};
pub use stats::{parse_frame_stats, write_frame_stats, FrameStats, FrameType};
pub use synthetic::{synth_encode, synth_quality_for_qp, SyntheticCodecSpec, SyntheticGateway};
pub use toy::{toy_intra_encode, ToyEncodeResult, TOY_FRAME_HEADER_BITS};

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, MetricsError, QualityMetric, RdCurve};
use crate::video_io::{Clip, ClipMeta, VideoError, Y4mError};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("invalid encoder profile `{name}`: {reason}")]
    Profile { name: String, reason: String },
    #[error("template: {0}")]
    Template(String),
    #[error("failed to spawn `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("`{command}` exited with {status}; temp files kept in {workdir}\n{stderr}")]
    Exit {
        command: String,
        status: String,
        stderr: String,
        workdir: String,
    },
    #[error("encoder produced no output file at {0}")]
    MissingOutput(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("k vector has {given} entries but the profile addresses {groups} frame groups")]
    KVector { given: usize, groups: usize },
    #[error("invalid synthetic codec spec: {0}")]
    Spec(String),
    #[error("source `{0}` has no pixels; only the synthetic codec can encode it")]
    NoPixels(String),
    #[error("encode of `{0}` yielded neither a decoded clip nor an analytic quality")]
    NoQuality(String),
    #[error("external encoding is not available in this build")]
    Unsupported,
    #[error(transparent)]
    Video(#[from] VideoError),
    #[error(transparent)]
    Y4m(#[from] Y4mError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A clip as seen by an encoder: always its geometry, optionally its
/// pixels and/or a file the pixels came from.
#[derive(Debug, Clone)]
pub struct SourceClip {
    pub meta: ClipMeta,
    pub clip: Option<Arc<Clip>>,
    pub path: Option<PathBuf>,
}

impl SourceClip {
    pub fn from_clip(clip: Clip) -> Self {
        Self {
            meta: clip.meta(),
            clip: Some(Arc::new(clip)),
            path: None,
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self, CodecError> {
        let path = path.into();
        let clip = crate::video_io::read_y4m_file(&path)?;
        Ok(Self {
            meta: clip.meta(),
            clip: Some(Arc::new(clip)),
            path: Some(path),
        })
    }

    /// Geometry only; encodable by the synthetic codec.
    pub fn meta_only(meta: ClipMeta) -> Self {
        Self {
            meta,
            clip: None,
            path: None,
        }
    }

    pub fn id(&self) -> &str {
        &self.meta.source_id
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeResult {
    pub bitrate_kbps: f64,
    /// Encoder wall time in seconds (decode excluded).
    pub wall_time: f64,
    #[serde(skip)]
    pub decoded: Option<Clip>,
    /// Quality supplied by the codec itself (synthetic path).
    pub analytic_quality: Option<f64>,
    pub per_frame_stats: Option<Vec<FrameStats>>,
}

/// Anything that can encode a source at one QP/preset/k operating point.
pub trait Gateway: Send + Sync {
    fn name(&self) -> &str;

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError>;
}

impl<G: Gateway + ?Sized> Gateway for &G {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError> {
        (**self).encode(src, qp, preset, k)
    }
}

impl<G: Gateway + ?Sized> Gateway for Arc<G> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError> {
        (**self).encode(src, qp, preset, k)
    }
}

/// Counts encode calls and accumulates encoder wall time.
pub struct CountingGateway<G> {
    inner: G,
    calls: AtomicUsize,
    micros: AtomicUsize,
}

impl<G: Gateway> CountingGateway<G> {
    pub fn new(inner: G) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
            micros: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn wall_time(&self) -> f64 {
        self.micros.load(Ordering::SeqCst) as f64 / 1e6
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: Gateway> Gateway for CountingGateway<G> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let r = self.inner.encode(src, qp, preset, k)?;
        self.micros
            .fetch_add((r.wall_time * 1e6).round() as usize, Ordering::SeqCst);
        Ok(r)
    }
}

/// Quality of one encode: analytic if the codec provides it, otherwise
/// measured on the decoded output against the source pixels.
pub fn encode_quality(src: &SourceClip, result: &EncodeResult, metric: QualityMetric) -> Result<f64, CodecError> {
    if let Some(q) = result.analytic_quality {
        return Ok(q);
    }
    let decoded = result
        .decoded
        .as_ref()
        .ok_or_else(|| CodecError::NoQuality(src.id().to_string()))?;
    let reference = src
        .clip
        .as_ref()
        .ok_or_else(|| CodecError::NoPixels(src.id().to_string()))?;
    Ok(match metric {
        QualityMetric::Psnr => metrics::psnr(reference, decoded)?,
        QualityMetric::MsSsim => metrics::ms_ssim(reference, decoded)?,
    })
}

/// One RD point per QP plus the total encoder wall time.
#[derive(Debug, Clone)]
pub struct RdRun {
    pub curve: RdCurve,
    pub wall_time: f64,
    pub encodes: usize,
    pub results: Vec<EncodeResult>,
}

/// Encode `src` at every QP of `settings` with multiplier vector `k` and
/// build the validated RD curve. Encodes run concurrently when the
/// `parallel` feature is on; points are assembled in QP order.
pub fn rd_curve<G: Gateway + ?Sized>(
    gateway: &G,
    src: &SourceClip,
    settings: &EncodeSettings,
    k: &[f64],
    metric: QualityMetric,
) -> Result<RdRun, CodecError> {
    let one = |qp: &u32| -> Result<(f64, f64, EncodeResult), CodecError> {
        let mut r = gateway.encode(src, *qp, &settings.preset, k)?;
        let q = encode_quality(src, &r, metric)?;
        r.decoded = None;
        Ok((r.bitrate_kbps, q, r))
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        settings.qp_list.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = settings.qp_list.iter().map(one).collect();

    let mut samples = Vec::with_capacity(runs.len());
    let mut results = Vec::with_capacity(runs.len());
    let mut wall = 0.0;
    for r in runs {
        let (rate, q, res) = r?;
        wall += res.wall_time;
        samples.push((rate, q));
        results.push(res);
    }
    let curve = metrics::build_rd_curve(&samples, metric)?;
    Ok(RdRun {
        curve,
        wall_time: wall,
        encodes: results.len(),
        results,
    })
}
