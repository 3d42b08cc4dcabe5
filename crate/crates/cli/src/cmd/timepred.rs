use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clipforge::load_predict::synth::{generate_time_samples, TimeLaw};
use clipforge::load_predict::{
    classifier_report, estimate_cost, evaluate, extract_complexity, make_bins, predict_time, read_features_csv,
    read_time_samples_csv, split_dataset, train_duration_classifier, train_time_model, write_features_csv,
    write_time_samples_csv, BinMode, ComplexityFeatures, CostEstimate, CostJob, CostMode, EvalReport, EvalSpace,
    SplitMode, TargetTransform, TimeModel, TimeSample,
};
use clipforge::video_io::read_y4m_file;
use serde::Serialize;

use super::{Completion, Ctx, UsageError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(clap::Subcommand, Debug)]
pub enum Command {
    /// Complexity features of Y4M clips.
    Extract(ExtractArgs),
    /// Synthetic timing corpus following a known law.
    Synth(SynthArgs),
    /// Train a regression model of encode time.
    Train(TrainArgs),
    /// Score models on a holdout set.
    Eval(EvalArgs),
    /// Train a duration-bin classifier.
    Classify(ClassifyArgs),
    /// Predict encode time and optionally price a job.
    Predict(PredictArgs),
}

#[derive(clap::Args, Debug)]
pub struct ExtractArgs {
    #[arg(required = true)]
    pub clips: Vec<PathBuf>,
    /// Preset index on the encoder's ladder.
    #[arg(long, default_value_t = 4)]
    pub preset: u32,
    #[arg(long, default_value_t = 27)]
    pub crf: u32,
}

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    /// Standard deviation of the multiplicative log-normal noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// Timing samples CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// `linear` or `log`.
    #[arg(long, default_value = "log")]
    pub transform: String,
    /// Hold out part of the data: `overfit` or `generalised`.
    #[arg(long)]
    pub split: Option<String>,
    /// Training fraction when splitting.
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
}

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// Model JSON (repeatable).
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// Holdout timing samples CSV.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct ClassifyArgs {
    /// Training samples CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Samples to report on; the training set otherwise.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub bins: usize,
    /// `linear` or `geometric`.
    #[arg(long, default_value = "geometric")]
    pub binning: String,
}

#[derive(clap::Args, Debug)]
pub struct PredictArgs {
    /// Time model JSON; needed for time predictions and compute pricing.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Features CSV from `extract`.
    #[arg(long, conflicts_with = "clip")]
    pub features: Option<PathBuf>,
    /// Y4M clip to extract features from.
    #[arg(long)]
    pub clip: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub preset: u32,
    #[arg(long, default_value_t = 27)]
    pub crf: u32,
    /// Pricing mode: `per_minute` or `compute_time`.
    #[arg(long)]
    pub price: Option<String>,
    #[arg(long, default_value = "basic")]
    pub tier: String,
    /// Output codecs, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "h264")]
    pub codec: Vec<String>,
    #[arg(long, default_value = "us-east")]
    pub region: String,
    /// Compute instance class for `compute_time`.
    #[arg(long, default_value = "standard")]
    pub instance: String,
    /// Output duration in seconds; taken from the clip otherwise.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub fps: Option<f64>,
    /// Pricing table (TOML); overrides the configured one.
    #[arg(long)]
    pub pricing: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, c: &Command) -> anyhow::Result<Completion> {
    match c {
        Command::Extract(a) => extract(ctx, a),
        Command::Synth(a) => synth(ctx, a),
        Command::Train(a) => train(ctx, a),
        Command::Eval(a) => eval(ctx, a),
        Command::Classify(a) => classify(ctx, a),
        Command::Predict(a) => predict(ctx, a),
    }
}

fn usage<E: std::fmt::Display>(e: E) -> anyhow::Error {
    UsageError::msg(e.to_string())
}

fn read_samples(path: &Path) -> anyhow::Result<Vec<TimeSample>> {
    read_time_samples_csv(super::open(path)?).with_context(|| path.display().to_string())
}

fn samples_csv(samples: &[TimeSample]) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_time_samples_csv(&mut buf, samples)?;
    Ok(buf)
}

fn read_model(path: &PathBuf) -> anyhow::Result<TimeModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TimeModel::from_json(&text).with_context(|| path.display().to_string())
}

fn extract_one(path: &Path, preset: u32, crf: u32) -> anyhow::Result<(String, ComplexityFeatures)> {
    let clip = read_y4m_file(path).with_context(|| format!("reading {}", path.display()))?;
    let f = extract_complexity(&clip, preset, crf).with_context(|| path.display().to_string())?;
    Ok((clip.source_id.to_string(), f))
}

fn extract(ctx: &Ctx, a: &ExtractArgs) -> anyhow::Result<Completion> {
    let mut rows = Vec::new();
    for p in &a.clips {
        match extract_one(p, a.preset, a.crf) {
            Ok(r) => {
                ctx.out.task(format!("extract/{}", r.0), Ok(()));
                rows.push(r);
            }
            Err(e) => {
                log::warn!("{e:#}");
                ctx.out.task(format!("extract/{}", p.display()), Err(format!("{e:#}")));
            }
        }
    }
    rows.sort_by(|x, y| x.0.cmp(&y.0));
    let mut buf = Vec::new();
    write_features_csv(&mut buf, &rows)?;
    ctx.out.write("features.csv", &buf)?;
    ctx.out.write_json(
        "features.json",
        &serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": ctx.seed,
            "feature_schema_hash": format!("{:016x}", ComplexityFeatures::schema_hash()),
            "clips": rows.iter().map(|(id, f)| serde_json::json!({"source_id": id, "features": f})).collect::<Vec<_>>(),
        }),
    )?;
    println!("{} of {} clip(s) extracted", rows.len(), a.clips.len());
    Ok(if rows.is_empty() {
        Completion::AllFailed
    } else {
        Completion::Done
    })
}

fn synth(ctx: &Ctx, a: &SynthArgs) -> anyhow::Result<Completion> {
    if a.n == 0 || !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(UsageError::msg("--n must be positive and --noise non-negative"));
    }
    let samples = generate_time_samples(a.n, &TimeLaw::default(), a.noise, ctx.seed);
    ctx.out.write("samples.csv", &samples_csv(&samples)?)?;
    println!("{} samples", samples.len());
    ctx.out.task("synth", Ok(()));
    Ok(Completion::Done)
}

#[derive(Serialize)]
struct TrainReport {
    schema_version: u32,
    seed: u64,
    transform: TargetTransform,
    split: Option<String>,
    n_train: usize,
    n_test: usize,
    /// Absent when the training targets cannot be scored (a zero duration).
    training_fit: Option<EvalReport>,
}

fn train(ctx: &Ctx, a: &TrainArgs) -> anyhow::Result<Completion> {
    let transform: TargetTransform = a.transform.parse().map_err(usage)?;
    let samples = read_samples(&a.data)?;
    let (train, test) = match &a.split {
        Some(m) => {
            let mode: SplitMode = m.parse().map_err(usage)?;
            let (tr, te) = split_dataset(&samples, mode, a.train_ratio, ctx.seed).map_err(usage)?;
            ctx.out.write("train.csv", &samples_csv(&tr)?)?;
            ctx.out.write("test.csv", &samples_csv(&te)?)?;
            (tr, te)
        }
        None => (samples, Vec::new()),
    };
    let model = train_time_model(&train, transform, ctx.cfg.time_model, ctx.seed)
        .with_context(|| a.data.display().to_string())?;
    let space = match transform {
        TargetTransform::Linear => EvalSpace::Linear,
        TargetTransform::Log => EvalSpace::Log,
    };
    let fit = evaluate(&model, &train, space)
        .map_err(|e| log::warn!("no training fit report: {e}"))
        .ok();
    ctx.out
        .write("time_model.json", format!("{}\n", model.to_json()).as_bytes())?;
    let report = TrainReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: ctx.seed,
        transform,
        split: a.split.clone(),
        n_train: train.len(),
        n_test: test.len(),
        training_fit: fit.clone(),
    };
    ctx.out.write_json("train_report.json", &report)?;
    println!(
        "{transform} model on {} samples, training R² {}",
        train.len(),
        fit.and_then(|f| f.r2).map_or("n/a".into(), |r| format!("{r:.4}"))
    );
    ctx.out.task("train", Ok(()));
    Ok(Completion::Done)
}

#[derive(Serialize)]
struct EvalRow {
    model: String,
    space: EvalSpace,
    n: usize,
    r2: Option<f64>,
    mae_pct: f64,
    smae_pct: f64,
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> anyhow::Result<Completion> {
    let holdout = read_samples(&a.data)?;
    let mut blocks: BTreeMap<String, EvalReport> = BTreeMap::new();
    let mut rows = Vec::new();
    for path in &a.models {
        let model = read_model(path)?;
        let spaces: &[EvalSpace] = match model.transform {
            TargetTransform::Linear => &[EvalSpace::Linear],
            TargetTransform::Log => &[EvalSpace::Log, EvalSpace::LogToLinear],
        };
        for &space in spaces {
            let r = evaluate(&model, &holdout, space).with_context(|| path.display().to_string())?;
            let key = space.to_string();
            if blocks.contains_key(&key) {
                return Err(UsageError::msg(format!("two models score in the {key} space")));
            }
            println!(
                "{key:>13}: R² {}  MAE {:.2}%  sMAE {:.2}%",
                r.r2.map_or("n/a".into(), |v| format!("{v:.4}")),
                r.mae_pct,
                r.smae_pct
            );
            rows.push(EvalRow {
                model: path.display().to_string(),
                space,
                n: r.n,
                r2: r.r2,
                mae_pct: r.mae_pct,
                smae_pct: r.smae_pct,
            });
            blocks.insert(key, r);
        }
    }
    ctx.out.write_json(
        "eval.json",
        &serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": ctx.seed,
            "holdout": a.data.display().to_string(),
            "blocks": blocks,
        }),
    )?;
    ctx.out.write("eval.csv", &super::csv_bytes(&rows)?)?;
    ctx.out.task("eval", Ok(()));
    Ok(Completion::Done)
}

fn classify(ctx: &Ctx, a: &ClassifyArgs) -> anyhow::Result<Completion> {
    let mode: BinMode = a.binning.parse().map_err(usage)?;
    let train = read_samples(&a.data)?;
    let (lo, hi) = train
        .iter()
        .map(|s| s.measured_seconds)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), t| (l.min(t), h.max(t)));
    let bins = make_bins(mode, a.bins, lo, hi).map_err(usage)?;
    let (clf, train_report) = train_duration_classifier(&train, &bins, ctx.cfg.classifier, ctx.seed)?;
    let report = match &a.test {
        Some(p) => classifier_report(&clf, &read_samples(p)?),
        None => train_report,
    };
    ctx.out
        .write_json("classifier.json", &super::with_seed(&clf, ctx.seed)?)?;
    ctx.out.write_json(
        "classifier_report.json",
        &serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": ctx.seed,
            "binning": mode.to_string(),
            "edges": clf.bins.edges,
            "on": if a.test.is_some() { "test" } else { "train" },
            "report": report,
        }),
    )?;
    println!("{mode} bins, macro recall {:.4}", report.macro_recall);
    ctx.out.task("classify", Ok(()));
    Ok(Completion::Done)
}

#[derive(Serialize)]
struct Prediction {
    source_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<CostEstimate>,
}

#[derive(Serialize)]
struct PredictionRow {
    source_id: String,
    predicted_seconds: Option<f64>,
    cost_mode: Option<String>,
    cost_total: Option<f64>,
    currency: Option<String>,
}

fn predict(ctx: &Ctx, a: &PredictArgs) -> anyhow::Result<Completion> {
    let model = a.model.as_ref().map(read_model).transpose()?;
    let mode: Option<CostMode> = a.price.as_deref().map(str::parse).transpose().map_err(usage)?;
    let pricing = match &a.pricing {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            clipforge::load_predict::PricingTable::from_toml(&text).with_context(|| p.display().to_string())?
        }
        None => ctx.cfg.pricing_table()?,
    };
    let rows: Vec<(String, Option<ComplexityFeatures>)> = if let Some(p) = &a.features {
        read_features_csv(super::open(p)?)
            .with_context(|| p.display().to_string())?
            .into_iter()
            .map(|(id, f)| (id, Some(f)))
            .collect()
    } else if let Some(p) = &a.clip {
        let (id, f) = extract_one(p, a.preset, a.crf)?;
        vec![(id, Some(f))]
    } else {
        vec![("job".to_string(), None)]
    };
    if model.is_none() && mode.is_none() {
        return Err(UsageError::msg("nothing to do: pass --model and/or --price"));
    }
    if model.is_some() && rows.iter().any(|r| r.1.is_none()) {
        return Err(UsageError::msg("time prediction needs --features or --clip"));
    }

    let mut out = Vec::new();
    for (id, f) in rows {
        let secs = match (&model, &f) {
            (Some(m), Some(f)) => Some(predict_time(m, f).with_context(|| id.clone())?),
            _ => None,
        };
        let cost = match mode {
            None => None,
            Some(mode) => {
                let pick = |given: Option<f64>, from: Option<f64>, what: &str| {
                    given
                        .or(from)
                        .ok_or_else(|| UsageError::msg(format!("pricing `{id}` needs --{what}")))
                };
                let fps_f = f.as_ref().map(|f| f.frame_rate);
                let job = CostJob {
                    duration_seconds: pick(a.duration, f.as_ref().map(|f| f.n_frames / f.frame_rate), "duration")?,
                    height: pick(a.height.map(f64::from), f.as_ref().map(|f| f.height), "height")? as u32,
                    frame_rate: pick(a.fps, fps_f, "fps")?,
                    codecs: a.codec.clone(),
                    tier: a.tier.clone(),
                    region: a.region.clone(),
                    instance: Some(a.instance.clone()),
                };
                Some(estimate_cost(&job, &pricing, mode, secs).with_context(|| id.clone())?)
            }
        };
        if let Some(s) = secs {
            println!("{id}: {s:.3} s");
        }
        if let Some(c) = &cost {
            println!("{id}: cost {} {}", c.total, c.currency);
        }
        out.push(Prediction {
            source_id: id,
            predicted_seconds: secs,
            cost,
        });
    }
    ctx.out.write_json(
        "predictions.json",
        &serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": ctx.seed,
            "predictions": out,
        }),
    )?;
    let rows: Vec<PredictionRow> = out
        .iter()
        .map(|p| PredictionRow {
            source_id: p.source_id.clone(),
            predicted_seconds: p.predicted_seconds,
            cost_mode: p.cost.as_ref().map(|c| c.mode.to_string()),
            cost_total: p.cost.as_ref().map(|c| c.total),
            currency: p.cost.as_ref().map(|c| c.currency.clone()),
        })
        .collect();
    ctx.out.write("predictions.csv", &super::csv_bytes(&rows)?)?;
    ctx.out.task("predict", Ok(()));
    Ok(Completion::Done)
}
