//! Denoiser/encoder cascade calibration: sweep noise level × bitrate ×
//! filter strength, pick the best strength per cell row and fit a
//! degree-5 polynomial policy s*(σ, ln rate).

mod policy;
mod sweep;
mod wiener;

pub use policy::{fit_policy, optimal_strength, StrengthPolicy, POLICY_TERMS};
#[cfg(feature = "external")]
pub use sweep::ExternalRateEncoder;
pub use sweep::{
    argmax_strengths, read_argmax_csv, read_sweep_csv, run_sweep, write_argmax_csv, write_sweep_csv, ArgmaxEntry,
    RateEncoder, SweepCell, SweepGrid, SweepResult, ToyRateEncoder,
};
pub use wiener::{wiener3d_denoise, WIENER_BLOCK, WIENER_STRIDE, WIENER_TEMPORAL};

use thiserror::Error;

use crate::codec_gateway::CodecError;
use crate::video_io::VideoError;

pub const SWEEP_SCHEMA_VERSION: u32 = 1;
pub const POLICY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PreprocError {
    #[error("invalid sweep grid: {0}")]
    Grid(String),
    #[error("policy fit needs at least {needed} table entries, got {got}")]
    TooFewEntries { needed: usize, got: usize },
    #[error("policy design matrix has rank {rank} < {needed}; the table does not span both axes")]
    RankDeficient { rank: usize, needed: usize },
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Video(#[from] VideoError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
