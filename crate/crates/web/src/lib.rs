//! wasm-bindgen entry points for the static demo page in `www/`. Every
//! operation returns a JSON string holding its numbers and an SVG chart.

use clipforge::codec_gateway::{SourceClip, SyntheticCodecSpec, SyntheticGateway};
use clipforge::lambda_opt::{optimize_k, optimize_with_proxy, LambdaSearchConfig, ProxyStrategy};
use clipforge::metrics::{bd_rate, read_rd_csv, RdCurve};
use clipforge::plot::{render_svg, Chart, ChartStyle, Series};
use clipforge::preproc_opt::{run_sweep, SweepGrid, ToyRateEncoder};
use clipforge::video_io::{synth, ClipMeta, FrameRate};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(r: Result<serde_json::Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn rd_series(label: &str, c: &RdCurve) -> Series {
    Series {
        label: label.into(),
        points: c.points().iter().map(|p| (p.rate, p.quality)).collect(),
    }
}

/// BD-rate of `test` against `reference`, both in the RD CSV format.
pub fn compare_curves(test_csv: &str, reference_csv: &str) -> Result<serde_json::Value, String> {
    let test = read_rd_csv(test_csv.as_bytes()).map_err(|e| format!("test curve: {e}"))?;
    let reference = read_rd_csv(reference_csv.as_bytes()).map_err(|e| format!("reference curve: {e}"))?;
    let bd = bd_rate(&test, &reference).map_err(|e| e.to_string())?;
    let svg = render_svg(&Chart {
        title: format!("BD-rate {bd:.3}%"),
        x_label: "bitrate (kbps)".into(),
        y_label: format!("{} (dB)", test.metric),
        log_x: true,
        style: ChartStyle::Lines,
        series: vec![rd_series("reference", &reference), rd_series("test", &test)],
    });
    Ok(json!({ "bd_rate": bd, "svg": svg }))
}

/// Search the Lagrangian multiplier scale on the synthetic codec with a
/// planted optimum `k_star`; `proxy` is `none`, `downsample` or `fast_preset`.
pub fn search_lambda(
    width: usize,
    height: usize,
    k_star: f64,
    gamma: f64,
    proxy: &str,
) -> Result<serde_json::Value, String> {
    let spec = SyntheticCodecSpec {
        k_star: vec![k_star],
        gamma,
        ..SyntheticCodecSpec::default()
    };
    let gw = SyntheticGateway::new(spec.clone()).map_err(|e| e.to_string())?;
    let src = SourceClip::meta_only(ClipMeta {
        source_id: "demo".into(),
        width,
        height,
        n_frames: 60,
        frame_rate: FrameRate::new(30, 1).map_err(|e| e.to_string())?,
    });
    let strategy: ProxyStrategy = proxy
        .parse()
        .map_err(|e: clipforge::lambda_opt::LambdaError| e.to_string())?;
    let cfg = LambdaSearchConfig {
        proxy: strategy,
        ..LambdaSearchConfig::default()
    };
    let settings = spec.settings();
    let o = if strategy == ProxyStrategy::None {
        optimize_k(&gw, &src, &settings, &cfg)
    } else {
        optimize_with_proxy(&gw, &src, &settings, &cfg)
    }
    .map_err(|e| e.to_string())?;

    let (lo, hi) = (cfg.k_bounds.0.ln(), cfg.k_bounds.1.ln());
    let model: Vec<(f64, f64)> = (0..=120)
        .map(|i| {
            let k = (lo + (hi - lo) * i as f64 / 120.0).exp();
            (k, spec.closed_form_bd_rate(&[k], height, &spec.default_preset))
        })
        .collect();
    let mut series = vec![Series {
        label: "closed form".into(),
        points: model,
    }];
    if strategy == ProxyStrategy::None {
        series.push(Series {
            label: "probes".into(),
            points: o.history.iter().map(|h| (h.k[0], h.bd_rate)).collect(),
        });
    }
    let svg = render_svg(&Chart {
        title: format!("k = {:.3}, gain {:.2}%", o.k_opt[0], o.bd_rate_gain),
        x_label: "k".into(),
        y_label: "BD-rate (%)".into(),
        log_x: true,
        style: ChartStyle::Markers,
        series,
    });
    Ok(json!({
        "k_opt": o.k_opt[0],
        "bd_rate_gain": o.bd_rate_gain,
        "iterations": o.iterations,
        "encodes": o.total_encodes,
        "wall_time": o.wall_time,
        "proxy": o.proxy,
        "svg": svg,
    }))
}

/// Final PSNR against denoiser strength for one small textured clip,
/// noised to `psnr_level` dB and toy-encoded at `bitrate_kbps`.
pub fn strength_sweep(psnr_level: f64, bitrate_kbps: f64, seed: u64) -> Result<serde_json::Value, String> {
    let clip = synth::textured_clip(64, 64, 4, 30, seed);
    let grid = SweepGrid {
        psnr_levels: vec![psnr_level],
        bitrates: vec![bitrate_kbps],
        ..SweepGrid::default()
    };
    let sweep = run_sweep(&[clip], &ToyRateEncoder, &grid, seed).map_err(|e| e.to_string())?;
    let points: Vec<(f64, f64)> = sweep
        .cells
        .iter()
        .filter_map(|c| c.final_psnr.map(|q| (c.strength, q)))
        .collect();
    let best = points
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |a, p| if p.1 > a.1 { p } else { a });
    let svg = render_svg(&Chart {
        title: format!("best strength {:.2} at {:.2} dB", best.0, best.1),
        x_label: "denoiser strength".into(),
        y_label: "PSNR vs clean (dB)".into(),
        log_x: false,
        style: ChartStyle::Lines,
        series: vec![Series {
            label: format!("{bitrate_kbps} kbps"),
            points: points.clone(),
        }],
    });
    Ok(json!({ "points": points, "best_strength": best.0, "best_psnr": best.1, "svg": svg }))
}

#[wasm_bindgen]
pub fn rd_explorer(test_csv: &str, reference_csv: &str) -> Result<String, JsError> {
    js(compare_curves(test_csv, reference_csv))
}

#[wasm_bindgen]
pub fn lambda_search(width: usize, height: usize, k_star: f64, gamma: f64, proxy: &str) -> Result<String, JsError> {
    js(search_lambda(width, height, k_star, gamma, proxy))
}

#[wasm_bindgen]
pub fn denoise_sweep(psnr_level: f64, bitrate_kbps: f64, seed: u64) -> Result<String, JsError> {
    js(strength_sweep(psnr_level, bitrate_kbps, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: &str = "rate_kbps,quality,metric\n100,30,PSNR\n200,33,PSNR\n400,36,PSNR\n800,39,PSNR\n";
    const TEST: &str = "rate_kbps,quality,metric\n90,30,PSNR\n180,33,PSNR\n360,36,PSNR\n720,39,PSNR\n";

    #[test]
    fn explorer_reports_bd_rate() {
        let v = compare_curves(TEST, REF).unwrap();
        assert!((v["bd_rate"].as_f64().unwrap() + 10.0).abs() < 1e-9);
        assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
        assert!(compare_curves("junk", REF).unwrap_err().contains("test curve"));
    }

    #[test]
    fn lambda_recovers_planted_k() {
        let v = search_lambda(1280, 720, 2.0, 0.5, "none").unwrap();
        assert!((v["k_opt"].as_f64().unwrap() / 2.0 - 1.0).abs() < 0.05);
        let p = search_lambda(1280, 720, 2.0, 0.5, "fast_preset").unwrap();
        assert!(p["proxy"].is_object());
        assert!(search_lambda(1280, 720, 2.0, 0.5, "bogus").is_err());
    }

    #[test]
    fn sweep_has_a_point_per_strength() {
        let v = strength_sweep(27.5, 2048.0, 1).unwrap();
        assert_eq!(
            v["points"].as_array().unwrap().len(),
            SweepGrid::default().strengths.len()
        );
    }
}
