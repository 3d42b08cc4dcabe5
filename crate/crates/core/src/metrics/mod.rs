//! Quality metrics and Bjøntegaard-delta rate over RD curves.

mod bdrate;
mod curve;
mod quality;

pub use bdrate::{bd_rate, Pchip};
pub use curve::{
    build_rd_curve, read_rd_csv, read_rd_points, write_rd_csv, QualityMetric, RdCurve, RdPoint,
    MAX_REPAIRABLE_INVERSION, RD_SCHEMA_VERSION,
};
pub use quality::{luma_mse, ms_ssim, ms_ssim_plane, psnr, psnr_from_mse, MS_SSIM_MIN_DIM, PSNR_CAP};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("clip shapes differ: reference {reference:?} vs test {test:?} (w, h, frames)")]
    ShapeMismatch {
        reference: (usize, usize, usize),
        test: (usize, usize, usize),
    },
    #[error("frames of {width}x{height} are too small for MS-SSIM (minimum {min}x{min})")]
    TooSmall { width: usize, height: usize, min: usize },
    #[error("an RD curve needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },
    #[error("duplicate rate {0} kbps")]
    DuplicateRate(f64),
    #[error("quality drops by {drop} at rate {rate} kbps; not a monotone curve")]
    NonMonotone { rate: f64, drop: f64 },
    #[error("curves do not overlap in quality")]
    NoOverlap,
    #[error("metric mismatch: {0} vs {1}")]
    MetricMismatch(QualityMetric, QualityMetric),
    #[error("unknown quality metric `{0}`")]
    UnknownMetric(String),
    #[error("line {line}: {reason}")]
    CsvRow { line: u64, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
