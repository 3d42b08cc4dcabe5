//! `clipforge`: batch front end for lambda search, pre-filter calibration
//! and encode-time prediction.

mod cmd;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmd::{Completion, Ctx, UsageError};
use config::JobConfig;
use output::Outputs;

#[derive(Parser, Debug)]
#[command(name = "clipforge", version, about = "Per-clip transcoder optimization")]
struct Cli {
    /// Job configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "CLIPFORGE_WORKERS")]
    workers: Option<usize>,
    /// Seed for every random choice; recorded in manifest.json.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More logging (repeatable).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BD-rate (%) of a test RD curve against a reference curve.
    Bdrate(cmd::bdrate::Args),
    /// Search the per-clip Lagrangian multiplier scale k.
    OptimizeLambda(cmd::lambda::Args),
    /// Denoiser strength sweeps and policies.
    #[command(subcommand)]
    Preproc(cmd::preproc::Command),
    /// Encode-time prediction and cost estimates.
    #[command(subcommand)]
    Timepred(cmd::timepred::Command),
    /// Render RD, sweep or feature-scatter plots to SVG.
    Plot(cmd::plot::Args),
}

fn workers(cli: &Cli, cfg: &JobConfig) -> usize {
    cli.workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn real_main() -> Result<Completion, anyhow::Error> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let cfg = match &cli.config {
        Some(p) => JobConfig::load(p).map_err(UsageError::wrap)?,
        None => JobConfig::default(),
    };
    let n_workers = workers(&cli, &cfg);
    if n_workers == 0 {
        return Err(UsageError::msg("--workers must be at least 1"));
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("clipforge-out"));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n_workers).build()?;
    let ctx = Ctx {
        out: Outputs::new(&out_dir)?,
        cfg,
        seed,
    };
    let result = pool.install(|| match &cli.command {
        Command::Bdrate(a) => cmd::bdrate::run(&ctx, a),
        Command::OptimizeLambda(a) => cmd::lambda::run(&ctx, a),
        Command::Preproc(c) => cmd::preproc::run(&ctx, c),
        Command::Timepred(c) => cmd::timepred::run(&ctx, c),
        Command::Plot(a) => cmd::plot::run(&ctx, a),
    });
    if let Err(e) = &result {
        ctx.out.task("command", Err(format!("{e:#}")));
    }
    let argv: Vec<String> = std::env::args().collect();
    let snapshot = serde_json::to_value(&ctx.cfg).unwrap_or(serde_json::Value::Null);
    ctx.out.finish(&argv, seed, n_workers, &snapshot)?;
    result
}

fn main() -> ExitCode {
    match real_main() {
        Ok(Completion::Done) => ExitCode::SUCCESS,
        Ok(Completion::AllFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
