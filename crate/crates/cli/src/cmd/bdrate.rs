use std::path::{Path, PathBuf};

use anyhow::Context;
use clipforge::metrics::{bd_rate, read_rd_csv, RdCurve};
use serde::Serialize;

use super::{open, Completion, Ctx};

pub const BDRATE_SCHEMA_VERSION: u32 = 1;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// RD curve CSV of the test encoder.
    pub test: PathBuf,
    /// RD curve CSV of the reference encoder.
    pub reference: PathBuf,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    seed: u64,
    test: String,
    reference: String,
    metric: String,
    bd_rate_pct: f64,
}

fn load(path: &Path) -> anyhow::Result<RdCurve> {
    read_rd_csv(open(path)?).with_context(|| format!("RD curve {}", path.display()))
}

pub fn run(ctx: &Ctx, a: &Args) -> anyhow::Result<Completion> {
    let test = load(&a.test)?;
    let reference = load(&a.reference)?;
    let bd = bd_rate(&test, &reference)
        .with_context(|| format!("{} against {}", a.test.display(), a.reference.display()))?;
    println!("BD-rate: {bd:.4}%");
    let r = Report {
        schema_version: BDRATE_SCHEMA_VERSION,
        seed: ctx.seed,
        test: a.test.display().to_string(),
        reference: a.reference.display().to_string(),
        metric: serde_json::to_value(test.metric)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        bd_rate_pct: bd,
    };
    ctx.out.write_json("bdrate.json", &r)?;
    ctx.out
        .write("bdrate.csv", &super::csv_bytes(std::slice::from_ref(&r))?)?;
    ctx.out.task("bdrate", Ok(()));
    Ok(Completion::Done)
}
