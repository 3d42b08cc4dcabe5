use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use clipforge::codec_gateway::{EncodeSettings, ExternalGateway, Gateway, SourceClip, SyntheticGateway};
use clipforge::lambda_opt::{
    optimize_k, optimize_with_proxy, summarize, write_outcomes_csv, write_summary_csv, LambdaSearchOutcome,
    ProxyStrategy,
};
use clipforge::video_io::{ClipMeta, FrameRate};
use log::{info, warn};
use rayon::prelude::*;

use super::{file_key, parse_dims, Completion, Ctx, UsageError};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Y4M files, or `ID=WIDTHxHEIGHTxFRAMES[@FPS]` geometry-only clips
    /// for the synthetic codec.
    pub clips: Vec<String>,
    /// Use the analytic codec instead of an encoder process.
    #[arg(long)]
    pub synthetic: bool,
    /// Planted optimum of the synthetic codec, one entry per frame group.
    #[arg(long, value_delimiter = ',')]
    pub planted_k: Option<Vec<f64>>,
    /// Curvature of the synthetic rate penalty.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Encoder profile (configured or built in).
    #[arg(long)]
    pub encoder: Option<String>,
    #[arg(long)]
    pub proxy: Option<String>,
    /// Number of independent k values (1 or 2).
    #[arg(long)]
    pub dims: Option<usize>,
    /// Label of the tuning in the summary row.
    #[arg(long, default_value = "default")]
    pub tuning: String,
}

/// `id=WxHxN[@fps]`.
pub fn parse_geometry(arg: &str) -> anyhow::Result<Option<ClipMeta>> {
    let Some((id, spec)) = arg.split_once('=') else {
        return Ok(None);
    };
    let (dims, fps) = match spec.split_once('@') {
        Some((d, f)) => (d, f.trim()),
        None => (spec, "30"),
    };
    let d = parse_dims(dims)?;
    if d.len() != 3 {
        return Err(UsageError::msg(format!("clip `{arg}` needs WIDTHxHEIGHTxFRAMES")));
    }
    let fps: u32 = fps
        .parse()
        .map_err(|_| UsageError::msg(format!("bad frame rate in `{arg}`")))?;
    Ok(Some(ClipMeta {
        source_id: id.trim().to_string(),
        width: d[0],
        height: d[1],
        n_frames: d[2],
        frame_rate: FrameRate::new(fps, 1).map_err(|e| UsageError::msg(e.to_string()))?,
    }))
}

enum ClipArg {
    Meta(ClipMeta),
    File(String, std::path::PathBuf),
}

impl ClipArg {
    fn id(&self) -> &str {
        match self {
            ClipArg::Meta(m) => &m.source_id,
            ClipArg::File(id, _) => id,
        }
    }

    fn load(&self) -> anyhow::Result<SourceClip> {
        Ok(match self {
            ClipArg::Meta(m) => SourceClip::meta_only(m.clone()),
            ClipArg::File(_, p) => SourceClip::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        })
    }
}

fn clip_args(raw: &[String]) -> anyhow::Result<Vec<ClipArg>> {
    let mut out = Vec::new();
    for a in raw {
        match parse_geometry(a)? {
            Some(m) => out.push(ClipArg::Meta(m)),
            None => {
                let p = Path::new(a);
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                out.push(ClipArg::File(id, p.to_path_buf()));
            }
        }
    }
    out.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = out.windows(2).find(|w| file_key(w[0].id()) == file_key(w[1].id())) {
        return Err(UsageError::msg(format!("clip id `{}` is used twice", w[0].id())));
    }
    Ok(out)
}

pub fn run(ctx: &Ctx, a: &Args) -> anyhow::Result<Completion> {
    if a.clips.is_empty() {
        return Err(UsageError::msg("optimize-lambda needs at least one clip"));
    }
    let clips = clip_args(&a.clips)?;
    let mut cfg = ctx.cfg.lambda.clone();
    if let Some(d) = a.dims {
        cfg.dims = d;
    }
    if let Some(p) = &a.proxy {
        cfg.proxy = p.parse::<ProxyStrategy>().map_err(|e| UsageError::msg(e.to_string()))?;
    }
    cfg.validate().map_err(|e| UsageError::msg(e.to_string()))?;

    let (gateway, settings): (Arc<dyn Gateway>, EncodeSettings) = if a.synthetic {
        let mut spec = ctx.cfg.synthetic.clone();
        if let Some(k) = &a.planted_k {
            spec.k_star = k.clone();
        }
        if let Some(g) = a.gamma {
            spec.gamma = g;
        }
        spec.seed = ctx.seed;
        let settings = spec.settings();
        let gw = SyntheticGateway::new(spec).map_err(|e| UsageError::msg(e.to_string()))?;
        (Arc::new(gw), settings)
    } else {
        if a.planted_k.is_some() || a.gamma.is_some() {
            return Err(UsageError::msg("--planted-k and --gamma need --synthetic"));
        }
        let name = a
            .encoder
            .as_deref()
            .ok_or_else(|| UsageError::msg("pass --encoder PROFILE or --synthetic"))?;
        let profile = ctx.cfg.profile(name).map_err(UsageError::wrap)?;
        let settings = profile.settings();
        let gw = ExternalGateway::new(profile).map_err(|e| UsageError::msg(e.to_string()))?;
        (Arc::new(gw), settings)
    };
    if clips.iter().any(|c| matches!(c, ClipArg::Meta(_))) && !a.synthetic {
        return Err(UsageError::msg("geometry-only clips need --synthetic"));
    }

    let results: Vec<(String, anyhow::Result<LambdaSearchOutcome>)> = clips
        .par_iter()
        .map(|c| {
            let r = c.load().and_then(|src| {
                let o = if cfg.proxy == ProxyStrategy::None {
                    optimize_k(gateway.as_ref(), &src, &settings, &cfg)?
                } else {
                    optimize_with_proxy(gateway.as_ref(), &src, &settings, &cfg)?
                };
                Ok(o)
            });
            (c.id().to_string(), r)
        })
        .collect();

    let mut outcomes = Vec::new();
    for (id, r) in results {
        match r {
            Ok(o) => {
                info!("{id}: k = {:?}, BD-rate {:.3}%", o.k_opt, o.bd_rate_gain);
                ctx.out.write_json(
                    &format!("lambda/{}.json", file_key(&id)),
                    &super::with_seed(&o, ctx.seed)?,
                )?;
                ctx.out.task(format!("lambda/{id}"), Ok(()));
                outcomes.push(o);
            }
            Err(e) => {
                warn!("{id}: {e:#}");
                ctx.out.task(format!("lambda/{id}"), Err(format!("{e:#}")));
            }
        }
    }
    let mut buf = Vec::new();
    write_outcomes_csv(&mut buf, &outcomes)?;
    ctx.out.write("lambda_outcomes.csv", &buf)?;
    let summary: Vec<_> = summarize(gateway.name(), &a.tuning, &outcomes).into_iter().collect();
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &summary)?;
    ctx.out.write("lambda_summary.csv", &buf)?;
    ctx.out.write_json(
        "lambda_summary.json",
        &serde_json::json!({
            "schema_version": clipforge::lambda_opt::OUTCOME_SCHEMA_VERSION,
            "seed": ctx.seed,
            "summary": summary,
            "failed": clips.len() - outcomes.len(),
        }),
    )?;
    for s in &summary {
        println!(
            "{} {}: k = {:?}, avg BD-rate {:.3}%, best {:.3}%, {} clip(s)",
            s.encoder, s.tuning, s.k, s.avg_bd_rate, s.best_bd_rate, s.clips
        );
    }
    Ok(if outcomes.is_empty() {
        Completion::AllFailed
    } else {
        Completion::Done
    })
}
