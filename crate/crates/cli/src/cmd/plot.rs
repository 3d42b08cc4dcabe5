use std::path::{Path, PathBuf};

use anyhow::Context;
use clipforge::load_predict::{read_features_csv, ComplexityFeatures};
use clipforge::metrics::read_rd_points;
use clipforge::plot::{render_svg, Chart, ChartStyle, Series};
use clipforge::preproc_opt::read_sweep_csv;

use super::{open, Completion, Ctx, UsageError};

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Quality against bitrate, one line per RD curve CSV.
    Rd,
    /// Final PSNR against denoiser strength, one line per bitrate.
    Sweep,
    /// Two complexity features against each other.
    Scatter,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// File name of the SVG inside the output directory.
    #[arg(long)]
    pub name: Option<String>,
    /// Degradation level to draw from a sweep; the first one by default.
    #[arg(long)]
    pub psnr_level: Option<f64>,
    #[arg(long, default_value = "se_mean")]
    pub x: String,
    #[arg(long, default_value = "te_mean")]
    pub y: String,
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn rd_chart(a: &Args) -> anyhow::Result<Chart> {
    let mut series = Vec::new();
    let mut metric = None;
    for p in &a.inputs {
        let (m, pts) = read_rd_points(open(p)?).with_context(|| format!("RD curve {}", p.display()))?;
        if metric.is_some_and(|prev| prev != m) {
            return Err(UsageError::msg(format!(
                "{} uses a different quality metric",
                p.display()
            )));
        }
        metric = Some(m);
        let mut points: Vec<(f64, f64)> = pts.iter().map(|p| (p.rate, p.quality)).collect();
        points.sort_by(|x, y| x.0.total_cmp(&y.0));
        series.push(Series { label: stem(p), points });
    }
    Ok(Chart {
        title: "Rate-distortion".into(),
        x_label: "bitrate (kbps)".into(),
        y_label: metric.map_or("quality".into(), |m| m.to_string()),
        log_x: true,
        style: ChartStyle::Lines,
        series,
    })
}

fn sweep_chart(a: &Args) -> anyhow::Result<Chart> {
    let [p] = a.inputs.as_slice() else {
        return Err(UsageError::msg("plot sweep takes one sweep CSV"));
    };
    let sweep = read_sweep_csv(open(p)?).with_context(|| format!("sweep {}", p.display()))?;
    let level = a.psnr_level.unwrap_or(sweep.cells[0].psnr_level);
    let cells: Vec<_> = sweep.cells.iter().filter(|c| c.psnr_level == level).collect();
    if cells.is_empty() {
        return Err(UsageError::msg(format!(
            "{} has no cells at level {level}",
            p.display()
        )));
    }
    let mut rates: Vec<f64> = cells.iter().map(|c| c.bitrate).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let width = rates.iter().map(|r| format!("{r}").len()).max().unwrap_or(1);
    let series = rates
        .iter()
        .map(|&r| Series {
            label: format!("{:>width$} kbps", format!("{r}")),
            points: cells
                .iter()
                .filter(|c| c.bitrate == r)
                .filter_map(|c| c.final_psnr.map(|q| (c.strength, q)))
                .collect(),
        })
        .collect();
    Ok(Chart {
        title: format!("Denoise then encode, input at {level} dB"),
        x_label: "denoiser strength".into(),
        y_label: "final PSNR (dB)".into(),
        log_x: false,
        style: ChartStyle::Lines,
        series,
    })
}

fn scatter_chart(a: &Args) -> anyhow::Result<Chart> {
    let col = |name: &str| {
        ComplexityFeatures::NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| {
                UsageError::msg(format!(
                    "unknown feature `{name}` (one of {})",
                    ComplexityFeatures::NAMES.join(", ")
                ))
            })
    };
    let (xi, yi) = (col(&a.x)?, col(&a.y)?);
    let mut series = Vec::new();
    for p in &a.inputs {
        let rows = read_features_csv(open(p)?).with_context(|| format!("features {}", p.display()))?;
        let points = rows
            .iter()
            .map(|(_, f)| {
                let v = f.to_vec();
                (v[xi], v[yi])
            })
            .collect();
        series.push(Series { label: stem(p), points });
    }
    Ok(Chart {
        title: format!("{} against {}", a.y, a.x),
        x_label: a.x.clone(),
        y_label: a.y.clone(),
        log_x: false,
        style: ChartStyle::Markers,
        series,
    })
}

pub fn run(ctx: &Ctx, a: &Args) -> anyhow::Result<Completion> {
    let (chart, default_name) = match a.kind {
        Kind::Rd => (rd_chart(a)?, "rd.svg"),
        Kind::Sweep => (sweep_chart(a)?, "sweep.svg"),
        Kind::Scatter => (scatter_chart(a)?, "scatter.svg"),
    };
    let name = a.name.as_deref().unwrap_or(default_name);
    let path = ctx.out.write(name, render_svg(&chart).as_bytes())?;
    println!("{}", path.display());
    ctx.out.task("plot", Ok(()));
    Ok(Completion::Done)
}
