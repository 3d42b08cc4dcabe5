//! Raw video containers, YUV4MPEG2 I/O, resolution proxies, noise synthesis
//! and simple pixel statistics.

mod frame;
mod ops;
pub mod synth;
mod y4m;

pub use frame::{ChromaSampling, Clip, ClipMeta, FrameRate, Plane, VideoFrame};
pub use ops::{
    add_gaussian_noise, downsample_half, downscale_to, mean_brightness, proxy_resolution, resize_area,
    sigma_for_target_psnr, PROXY_HALVING_ABOVE, PROXY_HEIGHT,
};
pub use y4m::{parse_y4m, read_y4m, read_y4m_file, write_y4m, write_y4m_file, write_y4m_to};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("degenerate dimensions {width}x{height}")]
    Degenerate { width: usize, height: usize },
    #[error("chroma plane is {found:?}, expected {expected:?}")]
    PlaneGeometry {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("frame rate {num}:{den} must be positive")]
    FrameRate { num: u32, den: u32 },
    #[error("clip has no frames")]
    EmptyClip,
    #[error("frame {frame} differs in geometry from frame 0")]
    MixedGeometry { frame: usize },
    #[error("target PSNR must be positive, got {0}")]
    InvalidPsnr(f64),
    #[error("noise sigma must be non-negative, got {0}")]
    InvalidSigma(f64),
}

#[derive(Debug, Error)]
pub enum Y4mError {
    #[error("stream does not start with the YUV4MPEG2 signature")]
    MissingSignature,
    #[error("unsupported colorspace tag `C{0}` (8-bit 420/422/444 only)")]
    UnsupportedColorspace(String),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("malformed FRAME header at frame {frame}")]
    BadFrameHeader { frame: usize },
    #[error("frame {frame} truncated: expected {expected} payload bytes, found {found}")]
    Truncated {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("stream contains no frames")]
    NoFrames,
    #[error(transparent)]
    Video(#[from] VideoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
