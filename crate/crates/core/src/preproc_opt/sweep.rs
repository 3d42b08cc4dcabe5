use std::io::{Read, Write};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::wiener::wiener3d_denoise;
use super::{PreprocError, SWEEP_SCHEMA_VERSION};
use crate::codec_gateway::{toy_intra_encode, CodecError};
use crate::metrics::psnr;
use crate::rng::mix_seed;
use crate::video_io::{add_gaussian_noise, sigma_for_target_psnr, Clip};

/// Something that compresses a clip to a target bitrate and hands back the
/// decoded pictures.
pub trait RateEncoder: Send + Sync {
    fn name(&self) -> &str;

    fn encode_at_rate(&self, clip: &Clip, kbps: f64) -> Result<Clip, CodecError>;
}

/// The built-in intra DCT coder.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyRateEncoder;

impl RateEncoder for ToyRateEncoder {
    fn name(&self) -> &str {
        "toy"
    }

    fn encode_at_rate(&self, clip: &Clip, kbps: f64) -> Result<Clip, CodecError> {
        let r = toy_intra_encode(clip, kbps)?;
        if r.at_ceiling {
            debug!(
                "toy encoder tops out at {:.1} kbps below the {kbps:.1} kbps target",
                r.bitrate_kbps
            );
        } else if !r.within_tolerance() {
            warn!(
                "toy encoder landed at {:.1} kbps for a {kbps:.1} kbps target",
                r.bitrate_kbps
            );
        }
        Ok(r.decoded)
    }
}

/// External encoder driven through a `{BITRATE}` template.
#[cfg(feature = "external")]
#[derive(Debug, Clone)]
pub struct ExternalRateEncoder {
    pub profile: crate::codec_gateway::EncoderProfile,
    pub preset: String,
}

#[cfg(feature = "external")]
impl RateEncoder for ExternalRateEncoder {
    fn name(&self) -> &str {
        &self.profile.name
    }

    fn encode_at_rate(&self, clip: &Clip, kbps: f64) -> Result<Clip, CodecError> {
        use crate::codec_gateway::{run_external_encode, SourceClip};
        let src = SourceClip::from_clip(clip.clone());
        let r = run_external_encode(&self.profile, &src, None, Some(kbps), &self.preset, &[])?;
        r.decoded
            .ok_or_else(|| CodecError::NoQuality(clip.source_id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    /// Degradation levels as PSNR of the noisy clip (dB); `inf` means the
    /// clean clip is used as is.
    pub psnr_levels: Vec<f64>,
    /// Target bitrates (kbps).
    pub bitrates: Vec<f64>,
    /// Denoiser strengths, ascending from 0.
    pub strengths: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        let psnr_levels = vec![20.0, 25.0, 27.5, 30.0, 35.0, 40.0];
        let s_max = 2.0 * sigma_for_target_psnr(20.0).expect("positive psnr");
        Self {
            psnr_levels,
            bitrates: (0..6).map(|i| 256.0 * 2f64.powi(i)).collect(),
            strengths: (0..8).map(|i| s_max * i as f64 / 7.0).collect(),
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), PreprocError> {
        let bad = |m: String| Err(PreprocError::Grid(m));
        if self.psnr_levels.is_empty() || self.bitrates.is_empty() || self.strengths.is_empty() {
            return bad("every axis needs at least one value".into());
        }
        if self.psnr_levels.iter().any(|p| !(*p > 0.0)) {
            return bad(format!("PSNR levels must be positive: {:?}", self.psnr_levels));
        }
        if self.bitrates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad(format!("bitrates must be positive: {:?}", self.bitrates));
        }
        if self.strengths[0] != 0.0 || self.strengths.windows(2).any(|w| !(w[0] < w[1])) {
            return bad(format!("strengths must start at 0 and increase: {:?}", self.strengths));
        }
        if self.strengths.iter().any(|s| !s.is_finite()) {
            return bad("strengths must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub psnr_level: f64,
    pub sigma: f64,
    pub bitrate: f64,
    pub strength: f64,
    /// Mean over clips of PSNR(decoded, clean); `None` for a hole.
    pub final_psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub seed: u64,
    pub clip_ids: Vec<String>,
    /// Ordered by psnr level, bitrate, strength (grid order).
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn holes(&self) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.final_psnr.is_none()).collect()
    }
}

/// Noise every clean clip to each PSNR level, denoise at each strength,
/// encode at each bitrate and score against the clean clip.
///
/// Each noisy/denoised clip is produced once and reused across bitrates.
/// A failed encode leaves a hole in its cell only.
pub fn run_sweep<E: RateEncoder + ?Sized>(
    clips: &[Clip],
    encoder: &E,
    grid: &SweepGrid,
    seed: u64,
) -> Result<SweepResult, PreprocError> {
    grid.validate()?;
    if clips.is_empty() {
        return Err(PreprocError::Grid("no clips to sweep".into()));
    }
    let sigmas = grid
        .psnr_levels
        .iter()
        .map(|p| {
            if p.is_infinite() {
                Ok(0.0)
            } else {
                sigma_for_target_psnr(*p)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (np, ns, nr) = (grid.psnr_levels.len(), grid.strengths.len(), grid.bitrates.len());
    let units: Vec<(usize, usize)> = (0..clips.len()).flat_map(|c| (0..np).map(move |p| (c, p))).collect();

    // Per (clip, level): per strength, per bitrate, the final PSNR.
    let unit = |&(c, p): &(usize, usize)| -> Result<Vec<Vec<Option<f64>>>, PreprocError> {
        let clean = &clips[c];
        let noisy = add_gaussian_noise(
            clean,
            sigmas[p],
            mix_seed(&[seed, c as u64, grid.psnr_levels[p].to_bits()]),
        )?;
        let mut by_strength = Vec::with_capacity(ns);
        for &s in &grid.strengths {
            let filtered = wiener3d_denoise(&noisy, s);
            let row = grid
                .bitrates
                .iter()
                .map(|&r| match encoder.encode_at_rate(&filtered, r) {
                    Ok(decoded) => psnr(clean, &decoded).ok(),
                    Err(e) => {
                        warn!("{} at {r} kbps, strength {s}: {e}", clean.source_id);
                        None
                    }
                })
                .collect();
            by_strength.push(row);
        }
        Ok(by_strength)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        units.par_iter().map(unit).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = units.iter().map(unit).collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::with_capacity(np * nr * ns);
    for p in 0..np {
        for r in 0..nr {
            for s in 0..ns {
                let mut sum = 0.0;
                let mut ok = true;
                for c in 0..clips.len() {
                    match results[c * np + p][s][r] {
                        Some(v) => sum += v,
                        None => ok = false,
                    }
                }
                cells.push(SweepCell {
                    psnr_level: grid.psnr_levels[p],
                    sigma: sigmas[p],
                    bitrate: grid.bitrates[r],
                    strength: grid.strengths[s],
                    final_psnr: ok.then(|| sum / clips.len() as f64),
                });
            }
        }
    }
    Ok(SweepResult {
        schema_version: SWEEP_SCHEMA_VERSION,
        seed,
        clip_ids: clips.iter().map(|c| c.source_id.to_string()).collect(),
        cells,
    })
}

/// Best strength of one (σ, rate) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxEntry {
    pub psnr_level: f64,
    pub sigma: f64,
    pub bitrate: f64,
    pub strength: f64,
    pub final_psnr: f64,
}

/// Per (level, bitrate) row, the strength with the highest final PSNR;
/// ties go to the smaller strength. Rows with holes are skipped.
pub fn argmax_strengths(sweep: &SweepResult) -> Vec<ArgmaxEntry> {
    let mut rows: Vec<(f64, f64, f64, Vec<&SweepCell>)> = Vec::new();
    for c in &sweep.cells {
        match rows.iter_mut().find(|r| r.0 == c.psnr_level && r.2 == c.bitrate) {
            Some(r) => r.3.push(c),
            None => rows.push((c.psnr_level, c.sigma, c.bitrate, vec![c])),
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for (level, sigma, bitrate, mut cells) in rows {
        if cells.iter().any(|c| c.final_psnr.is_none()) {
            warn!("skipping row at {level} dB / {bitrate} kbps: it has holes");
            continue;
        }
        cells.sort_by(|a, b| a.strength.total_cmp(&b.strength));
        let mut best = cells[0];
        for c in &cells[1..] {
            if c.final_psnr > best.final_psnr {
                best = c;
            }
        }
        out.push(ArgmaxEntry {
            psnr_level: level,
            sigma,
            bitrate,
            strength: best.strength,
            final_psnr: best.final_psnr.expect("complete row"),
        });
    }
    out
}

fn csv_err(context: &str, e: impl std::fmt::Display) -> PreprocError {
    PreprocError::Parse {
        context: context.to_string(),
        message: e.to_string(),
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// `sigma,psnr_level,bitrate,strength,final_psnr` rows after a schema
/// comment; holes have an empty `final_psnr`.
pub fn write_sweep_csv<W: Write>(mut w: W, sweep: &SweepResult) -> Result<(), PreprocError> {
    writeln!(
        w,
        "# clipforge sweep schema_version={SWEEP_SCHEMA_VERSION} seed={}",
        sweep.seed
    )?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["sigma", "psnr_level", "bitrate", "strength", "final_psnr"])
        .map_err(|e| csv_err("sweep csv", e))?;
    for c in &sweep.cells {
        wr.write_record([
            fmt(c.sigma),
            fmt(c.psnr_level),
            fmt(c.bitrate),
            fmt(c.strength),
            c.final_psnr.map(fmt).unwrap_or_default(),
        ])
        .map_err(|e| csv_err("sweep csv", e))?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SweepRow {
    sigma: f64,
    psnr_level: f64,
    bitrate: f64,
    strength: f64,
    final_psnr: Option<f64>,
}

/// Read the header comment's seed (0 if absent) and all rows.
pub fn read_sweep_csv<R: Read>(mut r: R) -> Result<SweepResult, PreprocError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let seed = text
        .lines()
        .next()
        .and_then(|l| l.split_whitespace().find_map(|t| t.strip_prefix("seed=")))
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cells = Vec::new();
    for (i, row) in rd.deserialize::<SweepRow>().enumerate() {
        let row = row.map_err(|e| csv_err(&format!("sweep csv row {}", i + 1), e))?;
        cells.push(SweepCell {
            psnr_level: row.psnr_level,
            sigma: row.sigma,
            bitrate: row.bitrate,
            strength: row.strength,
            final_psnr: row.final_psnr,
        });
    }
    if cells.is_empty() {
        return Err(csv_err("sweep csv", "no rows"));
    }
    Ok(SweepResult {
        schema_version: SWEEP_SCHEMA_VERSION,
        seed,
        clip_ids: Vec::new(),
        cells,
    })
}

pub fn write_argmax_csv<W: Write>(mut w: W, table: &[ArgmaxEntry]) -> Result<(), PreprocError> {
    writeln!(w, "# clipforge argmax schema_version={SWEEP_SCHEMA_VERSION}")?;
    let mut wr = csv::Writer::from_writer(w);
    for e in table {
        wr.serialize(e).map_err(|e| csv_err("argmax csv", e))?;
    }
    wr.flush()?;
    Ok(())
}

/// Argmax table; a plain `sigma,bitrate,strength` table is accepted too.
pub fn read_argmax_csv<R: Read>(r: R) -> Result<Vec<ArgmaxEntry>, PreprocError> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(default)]
        psnr_level: Option<f64>,
        sigma: f64,
        bitrate: f64,
        strength: f64,
        #[serde(default)]
        final_psnr: Option<f64>,
    }
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| csv_err(&format!("argmax csv row {}", i + 1), e))?;
        out.push(ArgmaxEntry {
            psnr_level: row.psnr_level.unwrap_or(f64::NAN),
            sigma: row.sigma,
            bitrate: row.bitrate,
            strength: row.strength,
            final_psnr: row.final_psnr.unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::synth;

    fn row(vals: &[f64], strengths: &[f64]) -> SweepResult {
        SweepResult {
            schema_version: 1,
            seed: 0,
            clip_ids: vec![],
            cells: vals
                .iter()
                .zip(strengths)
                .map(|(v, s)| SweepCell {
                    psnr_level: 30.0,
                    sigma: 8.06,
                    bitrate: 512.0,
                    strength: *s,
                    final_psnr: Some(*v),
                })
                .collect(),
        }
    }

    #[test]
    fn argmax_rules() {
        let s = [0.0, 5.0, 10.0];
        assert_eq!(argmax_strengths(&row(&[30.0, 32.0, 31.0], &s))[0].strength, 5.0);
        assert_eq!(argmax_strengths(&row(&[30.0, 32.0, 32.0], &s))[0].strength, 5.0);
        assert_eq!(argmax_strengths(&row(&[33.0, 32.0, 31.0], &s))[0].strength, 0.0);
        let mut holed = row(&[30.0, 32.0, 31.0], &s);
        holed.cells[2].final_psnr = None;
        assert!(argmax_strengths(&holed).is_empty());
    }

    #[test]
    fn grid_validation() {
        SweepGrid::default().validate().unwrap();
        let g = SweepGrid {
            strengths: vec![1.0, 2.0],
            ..Default::default()
        };
        assert!(g.validate().is_err());
        let g = SweepGrid {
            strengths: vec![0.0, 2.0, 2.0],
            ..Default::default()
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn single_cell_is_the_composed_pipeline() {
        let clip = synth::textured_clip(32, 32, 3, 30, 4);
        let grid = SweepGrid {
            psnr_levels: vec![30.0],
            bitrates: vec![300.0],
            strengths: vec![0.0],
        };
        let sweep = run_sweep(std::slice::from_ref(&clip), &ToyRateEncoder, &grid, 11).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        let sigma = sigma_for_target_psnr(30.0).unwrap();
        let noisy = add_gaussian_noise(&clip, sigma, mix_seed(&[11, 0, 30f64.to_bits()])).unwrap();
        let by_hand = toy_intra_encode(&wiener3d_denoise(&noisy, 0.0), 300.0).unwrap().decoded;
        // Strength 0 leaves the encode-only output untouched.
        let encode_only = toy_intra_encode(&noisy, 300.0).unwrap().decoded;
        assert_eq!(by_hand, encode_only);
        assert_eq!(sweep.cells[0].final_psnr, Some(psnr(&clip, &by_hand).unwrap()));
    }

    #[test]
    fn failing_encoder_leaves_holes() {
        struct Picky;
        impl RateEncoder for Picky {
            fn name(&self) -> &str {
                "picky"
            }
            fn encode_at_rate(&self, clip: &Clip, kbps: f64) -> Result<Clip, CodecError> {
                if kbps > 500.0 {
                    Err(CodecError::Unsupported)
                } else {
                    Ok(clip.clone())
                }
            }
        }
        let grid = SweepGrid {
            psnr_levels: vec![30.0],
            bitrates: vec![100.0, 1000.0],
            strengths: vec![0.0, 4.0],
        };
        let sweep = run_sweep(&[synth::textured_clip(16, 16, 3, 30, 1)], &Picky, &grid, 0).unwrap();
        assert_eq!(sweep.holes().len(), 2);
        assert_eq!(argmax_strengths(&sweep).len(), 1);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep).unwrap();
        let back = read_sweep_csv(&buf[..]).unwrap();
        assert_eq!(back.cells, sweep.cells);
        assert!(read_sweep_csv("sigma,psnr_level\n1,2\n".as_bytes()).is_err());
    }
}
