use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use log::{debug, warn};
use web_time::Instant;

use super::profile::{render_template, template_placeholders, EncoderProfile, Placeholder};
use super::stats::parse_frame_stats;
use super::{CodecError, EncodeResult, Gateway, SourceClip};
use crate::video_io::{parse_y4m, read_y4m_file, write_y4m_file};

/// Directory for per-encode scratch space; the system temp dir otherwise.
pub const TMPDIR_ENV: &str = "CLIPFORGE_TMPDIR";

const STDERR_TAIL: usize = 4096;

fn scratch_dir() -> Result<tempfile::TempDir, CodecError> {
    let mut b = tempfile::Builder::new();
    b.prefix("clipforge-");
    Ok(match std::env::var_os(TMPDIR_ENV) {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            b.tempdir_in(dir)?
        }
        None => b.tempdir()?,
    })
}

fn run(argv: &[String], workdir: &Path) -> Result<(), CodecError> {
    let command = argv.join(" ");
    debug!("running {command}");
    let out = Command::new(&argv[0])
        .args(&argv[1..])
        .current_dir(workdir)
        .stdin(Stdio::null())
        .output()
        .map_err(|source| CodecError::Spawn {
            command: command.clone(),
            source,
        })?;
    if !out.status.success() {
        let err = String::from_utf8_lossy(&out.stderr);
        let tail = if err.len() > STDERR_TAIL {
            let mut cut = err.len() - STDERR_TAIL;
            while !err.is_char_boundary(cut) {
                cut += 1;
            }
            &err[cut..]
        } else {
            &err[..]
        };
        return Err(CodecError::Exit {
            command,
            status: out.status.to_string(),
            stderr: tail.trim_end().to_string(),
            workdir: workdir.display().to_string(),
        });
    }
    Ok(())
}

fn fmt_k(k: f64) -> String {
    format!("{k:.6}")
}

/// Encode one operating point with an external encoder.
///
/// `qp` or `bitrate_kbps` fills `{QP}`/`{BITRATE}`; missing k entries
/// default to 1. The scratch directory is removed on success and kept (its
/// path is in the error) on failure.
pub fn run_external_encode(
    profile: &EncoderProfile,
    src: &SourceClip,
    qp: Option<u32>,
    bitrate_kbps: Option<f64>,
    preset: &str,
    k: &[f64],
) -> Result<EncodeResult, CodecError> {
    let k_slots = profile.k_slots();
    if k.len() > profile.frame_groups.len().max(k_slots) {
        return Err(CodecError::KVector {
            given: k.len(),
            groups: profile.frame_groups.len(),
        });
    }
    let dir = scratch_dir()?;
    let work = dir.path().to_path_buf();
    let result = encode_in(profile, src, qp, bitrate_kbps, preset, k, &work);
    match result {
        Ok(r) => Ok(r),
        Err(e) => {
            let kept = dir.keep();
            warn!("encode failed; scratch kept at {}", kept.display());
            Err(e)
        }
    }
}

fn encode_in(
    profile: &EncoderProfile,
    src: &SourceClip,
    qp: Option<u32>,
    bitrate_kbps: Option<f64>,
    preset: &str,
    k: &[f64],
    work: &Path,
) -> Result<EncodeResult, CodecError> {
    let input: PathBuf = match (&src.path, &src.clip) {
        (Some(p), _) => p.clone(),
        (None, Some(clip)) => {
            let p = work.join("input.y4m");
            write_y4m_file(clip, &p)?;
            p
        }
        (None, None) => return Err(CodecError::NoPixels(src.id().to_string())),
    };
    let output = work.join(format!("output.{}", profile.output_extension));
    let decoded = work.join("decoded.y4m");
    let stats = work.join("stats.csv");

    let mut values = BTreeMap::new();
    values.insert(Placeholder::Input, input.display().to_string());
    values.insert(Placeholder::Output, output.display().to_string());
    values.insert(Placeholder::Preset, preset.to_string());
    values.insert(Placeholder::Decoded, decoded.display().to_string());
    values.insert(Placeholder::Stats, stats.display().to_string());
    values.insert(Placeholder::K1, fmt_k(k.first().copied().unwrap_or(1.0)));
    values.insert(Placeholder::K2, fmt_k(k.get(1).copied().unwrap_or(1.0)));
    if let Some(q) = qp {
        values.insert(Placeholder::Qp, q.to_string());
    }
    if let Some(b) = bitrate_kbps {
        values.insert(Placeholder::Bitrate, format!("{}", b.round() as u64));
    }

    let argv = render_template(&profile.command_template, &values)?;
    let t0 = Instant::now();
    run(&argv, work)?;
    let wall_time = t0.elapsed().as_secs_f64().max(1e-9);

    let bytes = fs::metadata(&output)
        .map_err(|_| CodecError::MissingOutput(output.display().to_string()))?
        .len();
    if bytes == 0 {
        return Err(CodecError::MissingOutput(output.display().to_string()));
    }
    let bitrate_kbps = bytes as f64 * 8.0 / src.meta.duration_seconds() / 1000.0;

    let decoded_clip = match &profile.decode_command_template {
        Some(t) => {
            run(&render_template(t, &values)?, work)?;
            Some(read_y4m_file(&decoded).map_err(|e| CodecError::Decode(e.to_string()))?)
        }
        // Encoders that write Y4M directly need no decoder.
        None => fs::read(&output).ok().and_then(|b| parse_y4m(&b).ok()),
    };

    let uses_stats = template_placeholders(&profile.command_template)?.contains(&Placeholder::Stats);
    let per_frame_stats = if uses_stats {
        match fs::File::open(&stats)
            .map_err(CodecError::from)
            .and_then(parse_frame_stats)
        {
            Ok(s) => Some(s),
            Err(e) => {
                warn!("ignoring per-frame stats: {e}");
                None
            }
        }
    } else {
        None
    };

    Ok(EncodeResult {
        bitrate_kbps,
        wall_time,
        decoded: decoded_clip,
        analytic_quality: None,
        per_frame_stats,
    })
}

/// [`Gateway`] over an external encoder profile.
#[derive(Debug, Clone)]
pub struct ExternalGateway {
    pub profile: EncoderProfile,
}

impl ExternalGateway {
    pub fn new(profile: EncoderProfile) -> Result<Self, CodecError> {
        profile.validate()?;
        Ok(Self { profile })
    }
}

impl Gateway for ExternalGateway {
    fn name(&self) -> &str {
        &self.profile.name
    }

    fn encode(&self, src: &SourceClip, qp: u32, preset: &str, k: &[f64]) -> Result<EncodeResult, CodecError> {
        run_external_encode(&self.profile, src, Some(qp), None, preset, k)
    }
}
