//! Per-clip transcoder optimization toolkit.
//!
//! - [`video_io`]: planar 8-bit clips, YUV4MPEG2 I/O, proxies and noise.
//! - [`metrics`]: PSNR, MS-SSIM and Bjøntegaard-delta rate.
//! - [`optimizers`]: bracketing, Brent and Powell minimizers.
//! - [`codec_gateway`]: external encoders, a synthetic analytic codec and a
//!   toy DCT intra coder behind one encode interface.
//! - [`lambda_opt`]: per-clip Lagrangian multiplier search.
//! - [`preproc_opt`]: denoiser strength calibration against a codec.
//! - [`load_predict`]: encode-time prediction and cost budgeting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec_gateway;
pub mod dct;
pub mod lambda_opt;
pub mod learn;
pub mod load_predict;
pub mod metrics;
pub mod optimizers;
pub mod plot;
pub mod preproc_opt;
pub mod rng;
pub mod video_io;
