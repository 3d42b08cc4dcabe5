use std::path::PathBuf;

use anyhow::Context;
use clipforge::preproc_opt::{
    argmax_strengths, fit_policy, optimal_strength, read_argmax_csv, read_sweep_csv, run_sweep, wiener3d_denoise,
    write_argmax_csv, write_sweep_csv, ExternalRateEncoder, RateEncoder, StrengthPolicy, ToyRateEncoder,
};
use clipforge::video_io::{read_y4m_file, synth, write_y4m, Clip};
use serde::Serialize;

use super::{open, parse_dims, Completion, Ctx, UsageError};

#[derive(clap::Subcommand, Debug)]
pub enum Command {
    /// Final PSNR over noise level × bitrate × denoiser strength.
    Sweep(SweepArgs),
    /// Fit the strength policy to a sweep or argmax table.
    Fit(FitArgs),
    /// Strength for one (σ, rate); optionally denoise a clip with it.
    Apply(ApplyArgs),
}

#[derive(clap::Args, Debug)]
pub struct SweepArgs {
    /// Clean Y4M clips; synthetic textured clips when none are given.
    pub clips: Vec<PathBuf>,
    /// Number of synthetic clips.
    #[arg(long, default_value_t = 2)]
    pub synthetic_clips: usize,
    /// Synthetic clip size, WIDTHxHEIGHTxFRAMES.
    #[arg(long, default_value = "64x64x6")]
    pub size: String,
    /// `toy` or an encoder profile with a {BITRATE} template.
    #[arg(long, default_value = "toy")]
    pub encoder: String,
    /// Degradation levels in dB (`inf` for the clean clip).
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Target bitrates in kbps.
    #[arg(long, value_delimiter = ',')]
    pub bitrates: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub strengths: Option<Vec<f64>>,
}

#[derive(clap::Args, Debug)]
pub struct FitArgs {
    /// Sweep CSV or argmax CSV.
    pub input: PathBuf,
    /// Upper clamp of the policy; the largest tabulated strength by default.
    #[arg(long)]
    pub s_max: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct ApplyArgs {
    #[arg(long)]
    pub policy: PathBuf,
    /// Noise standard deviation of the source (8-bit units).
    #[arg(long)]
    pub sigma: f64,
    /// Target bitrate in kbps.
    #[arg(long)]
    pub rate: f64,
    /// Y4M clip to denoise.
    #[arg(long, requires = "output")]
    pub input: Option<PathBuf>,
    /// Where to write the denoised Y4M.
    #[arg(long, requires = "input")]
    pub output: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, c: &Command) -> anyhow::Result<Completion> {
    match c {
        Command::Sweep(a) => sweep(ctx, a),
        Command::Fit(a) => fit(ctx, a),
        Command::Apply(a) => apply(ctx, a),
    }
}

fn sweep(ctx: &Ctx, a: &SweepArgs) -> anyhow::Result<Completion> {
    let mut grid = ctx.cfg.sweep.clone();
    if let Some(v) = &a.levels {
        grid.psnr_levels = v.clone();
    }
    if let Some(v) = &a.bitrates {
        grid.bitrates = v.clone();
    }
    if let Some(v) = &a.strengths {
        grid.strengths = v.clone();
    }
    grid.validate().map_err(|e| UsageError::msg(e.to_string()))?;
    let clips: Vec<Clip> = if a.clips.is_empty() {
        let d = parse_dims(&a.size)?;
        if a.synthetic_clips == 0 {
            return Err(UsageError::msg("--synthetic-clips must be at least 1"));
        }
        (0..a.synthetic_clips as u64)
            .map(|i| synth::textured_clip(d[0], d[1], d.get(2).copied().unwrap_or(1), 30, ctx.seed.wrapping_add(i)))
            .collect()
    } else {
        a.clips
            .iter()
            .map(|p| read_y4m_file(p).with_context(|| format!("reading {}", p.display())))
            .collect::<anyhow::Result<_>>()?
    };
    let encoder: Box<dyn RateEncoder> = if a.encoder == "toy" {
        Box::new(ToyRateEncoder)
    } else {
        let profile = ctx.cfg.profile(&a.encoder).map_err(UsageError::wrap)?;
        let preset = profile.settings().preset;
        Box::new(ExternalRateEncoder { profile, preset })
    };
    let result = run_sweep(&clips, encoder.as_ref(), &grid, ctx.seed)?;
    let holes = result.holes().len();
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &result)?;
    ctx.out.write("sweep.csv", &buf)?;
    let table = argmax_strengths(&result);
    let mut buf = Vec::new();
    write_argmax_csv(&mut buf, &table)?;
    ctx.out.write("sweep_argmax.csv", &buf)?;
    ctx.out.write_json("sweep.json", &result)?;
    println!(
        "{} cells ({} holes), {} argmax rows, encoder {}",
        result.cells.len(),
        holes,
        table.len(),
        encoder.name()
    );
    ctx.out.task(
        "sweep",
        if holes == 0 {
            Ok(())
        } else {
            Err(format!("{holes} cells failed"))
        },
    );
    Ok(if holes == result.cells.len() {
        Completion::AllFailed
    } else {
        Completion::Done
    })
}

#[derive(Serialize)]
struct FitReport {
    schema_version: u32,
    seed: u64,
    input: String,
    entries: usize,
    s_max: f64,
    residual_rmse: f64,
    max_abs_residual: f64,
}

fn fit(ctx: &Ctx, a: &FitArgs) -> anyhow::Result<Completion> {
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let first = text.lines().next().unwrap_or_default();
    let table = if first.starts_with("# clipforge sweep") {
        argmax_strengths(&read_sweep_csv(text.as_bytes()).with_context(|| a.input.display().to_string())?)
    } else {
        read_argmax_csv(text.as_bytes()).with_context(|| a.input.display().to_string())?
    };
    let s_max = a
        .s_max
        .unwrap_or_else(|| table.iter().map(|e| e.strength).fold(0.0, f64::max));
    let policy = fit_policy(&table, s_max).with_context(|| a.input.display().to_string())?;
    let max_abs_residual = table
        .iter()
        .map(|e| (optimal_strength(&policy, e.sigma, e.bitrate) - e.strength).abs())
        .fold(0.0, f64::max);
    ctx.out
        .write("policy.json", format!("{}\n", policy.to_json()).as_bytes())?;
    let report = FitReport {
        schema_version: policy.schema_version,
        seed: ctx.seed,
        input: a.input.display().to_string(),
        entries: table.len(),
        s_max,
        residual_rmse: policy.residual_rmse,
        max_abs_residual,
    };
    ctx.out.write_json("fit_report.json", &report)?;
    ctx.out
        .write("fit_report.csv", &super::csv_bytes(std::slice::from_ref(&report))?)?;
    println!("residual RMSE: {:e} over {} entries", policy.residual_rmse, table.len());
    ctx.out.task("fit", Ok(()));
    Ok(Completion::Done)
}

#[derive(Serialize)]
struct ApplyReport {
    seed: u64,
    sigma: f64,
    rate_kbps: f64,
    strength: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

fn apply(ctx: &Ctx, a: &ApplyArgs) -> anyhow::Result<Completion> {
    if !(a.sigma >= 0.0 && a.sigma.is_finite() && a.rate > 0.0 && a.rate.is_finite()) {
        return Err(UsageError::msg("--sigma must be ≥ 0 and --rate positive"));
    }
    let mut text = String::new();
    std::io::Read::read_to_string(&mut open(&a.policy)?, &mut text)?;
    let policy = StrengthPolicy::from_json(&text).with_context(|| a.policy.display().to_string())?;
    let strength = optimal_strength(&policy, a.sigma, a.rate);
    println!("strength: {strength}");
    if let (Some(input), Some(output)) = (&a.input, &a.output) {
        let clip = read_y4m_file(input).with_context(|| format!("reading {}", input.display()))?;
        let out = wiener3d_denoise(&clip, strength);
        ctx.out.write_path(output, &write_y4m(&out))?;
    }
    let report = ApplyReport {
        seed: ctx.seed,
        sigma: a.sigma,
        rate_kbps: a.rate,
        strength,
        output: a.output.as_ref().map(|p| p.display().to_string()),
    };
    ctx.out.write_json("apply.json", &report)?;
    ctx.out.task("apply", Ok(()));
    Ok(Completion::Done)
}
