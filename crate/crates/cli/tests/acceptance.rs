//! Acceptance criteria 1 to 10, one PASS/FAIL line each. Runs as a plain
//! binary so the lines are printed without `--nocapture`.

mod common;

use std::cell::Cell;
use std::time::Instant;

use clipforge::codec_gateway::{rd_curve, SourceClip, SyntheticCodecSpec, SyntheticGateway};
use clipforge::lambda_opt::{optimize_k, optimize_with_proxy, LambdaSearchConfig, ProxyStrategy};
use clipforge::metrics::{bd_rate, build_rd_curve, psnr, QualityMetric, RdCurve};
use clipforge::optimizers::{brent_min, minimize_bounded, powell_min, Bracket, PowellOptions};
use clipforge::rng::seeded;
use clipforge::video_io::{ClipMeta, FrameRate};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(t0: Instant, limit: f64) -> Result<f64, String> {
    let s = t0.elapsed().as_secs_f64();
    check(s < limit, format!("took {s:.2} s, limit {limit} s"))?;
    Ok(s)
}

// Criterion 1 ----------------------------------------------------------

/// Shape-preserving cubic Hermite interpolant, written out independently
/// of the library.
struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            if m[k - 1] * m[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
            }
        }
        let end = |h0: f64, h1: f64, m0: f64, m1: f64| {
            let v = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
            if v.signum() != m0.signum() {
                0.0
            } else if m0.signum() != m1.signum() && v.abs() > 3.0 * m0.abs() {
                3.0 * m0
            } else {
                v
            }
        };
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            d[0] = end(h[0], h[1], m[0], m[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Self { x, y, d }
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.x.partition_point(|v| *v <= t).clamp(1, self.x.len() - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s).powi(2),
            s * (1.0 - s).powi(2),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// BD-rate by dense trapezoid integration of ln rate over quality.
fn bd_oracle(test: &[(f64, f64)], reference: &[(f64, f64)]) -> f64 {
    let interp = |pts: &[(f64, f64)]| {
        let mut p = pts.to_vec();
        p.sort_by(|a, b| a.1.total_cmp(&b.1));
        Hermite::new(p.iter().map(|v| v.1).collect(), p.iter().map(|v| v.0.ln()).collect())
    };
    let (it, ir) = (interp(test), interp(reference));
    let lo = it.x[0].max(ir.x[0]);
    let hi = it.x[it.x.len() - 1].min(ir.x[ir.x.len() - 1]);
    let n = 200_000;
    let step = (hi - lo) / n as f64;
    let gap = |q: f64| it.eval(q) - ir.eval(q);
    let mut sum = 0.5 * (gap(lo) + gap(hi));
    for i in 1..n {
        sum += gap(lo + i as f64 * step);
    }
    100.0 * (sum * step / (hi - lo)).exp_m1()
}

fn curve(points: &[(f64, f64)]) -> RdCurve {
    build_rd_curve(points, QualityMetric::Psnr).expect("valid curve")
}

fn random_curve<R: Rng>(rng: &mut R, rate_scale: f64) -> Vec<(f64, f64)> {
    let n = rng.random_range(4..=6);
    let alpha = rng.random_range(-10.0..5.0);
    let beta = rng.random_range(3.0..7.0);
    let c = rng.random_range(-0.1..0.1);
    let r0: f64 = rng.random_range(80.0..400.0);
    let ratio: f64 = rng.random_range(1.4..2.2);
    (0..n)
        .map(|i| {
            let r = r0 * ratio.powi(i) * rng.random_range(0.95..1.05);
            let lr = r.ln();
            (r * rate_scale, alpha + beta * lr + c * (lr - 6.0).powi(2))
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let reference = random_curve(&mut rng, 1.0);
        let scale = if i % 2 == 0 {
            rng.random_range(0.5..0.9)
        } else {
            rng.random_range(1.1..1.8)
        };
        let mut test = random_curve(&mut rng, scale);
        // Keep the quality ranges overlapping.
        let shift = reference[0].1 - test[0].1 + rng.random_range(-1.0..1.0);
        for p in &mut test {
            p.1 += shift;
        }
        let (ct, cr) = (curve(&test), curve(&reference));
        let got = bd_rate(&ct, &cr).map_err(|e| format!("pair {i}: {e}"))?;
        let want = bd_oracle(&test, &reference);
        let rel = (got - want).abs() / want.abs();
        worst = worst.max(rel);
        check(rel <= 1e-6, format!("pair {i}: {got} vs oracle {want}"))?;

        check(bd_rate(&cr, &cr).unwrap() == 0.0, format!("pair {i}: BD(C, C) != 0"))?;
        let back = bd_rate(&cr, &ct).unwrap();
        let recip = (1.0 + got / 100.0) * (1.0 + back / 100.0);
        check(
            (recip - 1.0).abs() <= 1e-9,
            format!("pair {i}: reciprocity off by {}", recip - 1.0),
        )?;
        let s = rng.random_range(0.5..2.0);
        let scaled = bd_rate(&ct.scale_rates(s), &cr).unwrap();
        let want_scaled = 100.0 * (s * (1.0 + got / 100.0) - 1.0);
        check(
            (scaled - want_scaled).abs() <= 1e-9 * want_scaled.abs().max(1.0),
            format!("pair {i}: scale property"),
        )?;
    }
    let s = within_time(t0, 5.0)?;
    Ok(format!(
        "50 pairs, worst relative error {worst:.1e}, properties hold [{s:.2} s]"
    ))
}

// Criterion 2 ----------------------------------------------------------

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut lines = 0;
    let run_brent = |f: &dyn Fn(f64) -> f64, pts: [f64; 3], tol: f64, truth: f64| -> Result<(), String> {
        let calls = Cell::new(0usize);
        let b = Bracket::from_points(pts.map(|x| (x, f(x)))).map_err(|e| e.to_string())?;
        let r = brent_min(
            |x| {
                calls.set(calls.get() + 1);
                f(x)
            },
            &b,
            tol,
            500,
        )
        .map_err(|e| e.to_string())?;
        check(
            (r.argmin - truth).abs() <= tol,
            format!("brent {pts:?}: {} vs {truth}", r.argmin),
        )?;
        check(
            r.evaluations == calls.get(),
            format!(
                "brent {pts:?}: {} evaluations reported, {} made",
                r.evaluations,
                calls.get()
            ),
        )
    };
    run_brent(&|x| (x - 3.0).powi(2), [0.0, 1.0, 10.0], 1e-6, 3.0)?;
    run_brent(&|x| (x - 1.0).abs(), [-2.0, 0.5, 4.0], 1e-5, 1.0)?;
    run_brent(&|x| x.powi(4) - 2.0 * x * x, [0.2, 0.9, 3.0], 1e-6, 1.0)?;
    run_brent(&|x| x.powi(4) - 2.0 * x * x, [-3.0, -0.9, -0.2], 1e-6, -1.0)?;
    run_brent(&|x| x.cosh() - 0.5 * x, [-1.0, 0.4, 2.0], 1e-6, 0.5f64.asinh())?;
    lines += 5;

    let calls = Cell::new(0usize);
    let r = minimize_bounded(
        |x| {
            calls.set(calls.get() + 1);
            x.cos()
        },
        1.0,
        0.5,
        (-10.0, 10.0),
        1e-6,
        200,
    )
    .map_err(|e| e.to_string())?;
    check(
        (r.argmin - std::f64::consts::PI).abs() <= 1e-6,
        format!("cos: {}", r.argmin),
    )?;
    check(r.evaluations == calls.get(), "cos: evaluation count")?;
    lines += 1;

    let calls = Cell::new(0usize);
    let rosen = |x: &[f64]| {
        calls.set(calls.get() + 1);
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    };
    let opts = PowellOptions {
        x_tol: 1e-8,
        max_iter: 500,
        ..PowellOptions::default()
    };
    let r = powell_min(rosen, &[-1.2, 1.0], &opts).map_err(|e| e.to_string())?;
    check(r.min_value <= 1e-6, format!("rosenbrock f = {}", r.min_value))?;
    check(
        r.evaluations == calls.get(),
        format!("powell: {} reported, {} made", r.evaluations, calls.get()),
    )?;
    let s = within_time(t0, 1.0)?;
    Ok(format!(
        "{lines} line searches within x_tol, Rosenbrock f = {:.1e} in {} evaluations, counts exact [{s:.3} s]",
        r.min_value, r.evaluations
    ))
}

// Criteria 3 and 4 ------------------------------------------------------

fn meta(id: &str, w: usize, h: usize) -> SourceClip {
    SourceClip::meta_only(ClipMeta {
        source_id: id.into(),
        width: w,
        height: h,
        n_frames: 60,
        frame_rate: FrameRate::new(30, 1).unwrap(),
    })
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let oracle = 100.0 * (1.0 / (1.0 + 0.5 * 2f64.ln().powi(2)) - 1.0);
    let spec = SyntheticCodecSpec {
        k_star: vec![2.0],
        gamma: 0.5,
        noise_std_log: 0.0,
        ..SyntheticCodecSpec::default()
    };
    let gw = SyntheticGateway::new(spec.clone()).unwrap();
    let src = meta("planted", 1280, 720);
    let o = optimize_k(&gw, &src, &spec.settings(), &LambdaSearchConfig::default()).map_err(|e| e.to_string())?;
    let k = o.k_opt[0];
    check((k / 2.0 - 1.0).abs() <= 0.05, format!("k = {k}"))?;
    check(
        (o.bd_rate_gain - oracle).abs() <= 0.3,
        format!("gain {} vs {oracle}", o.bd_rate_gain),
    )?;

    let spec2 = SyntheticCodecSpec {
        k_star: vec![4.0, 1.5],
        ..spec
    };
    let gw2 = SyntheticGateway::new(spec2.clone()).unwrap();
    let cfg = LambdaSearchConfig {
        dims: 2,
        ..LambdaSearchConfig::default()
    };
    let o2 = optimize_k(&gw2, &src, &spec2.settings(), &cfg).map_err(|e| e.to_string())?;
    let (lo, hi) = (cfg.k_bounds.0.ln(), cfg.k_bounds.1.ln());
    let n = ((hi - lo) / 0.02).round() as usize;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=n {
        for j in 0..=n {
            let k = [(lo + 0.02 * i as f64).exp(), (lo + 0.02 * j as f64).exp()];
            let v = spec2.closed_form_bd_rate(&k, 720, &spec2.default_preset);
            if v < best.0 {
                best = (v, k);
            }
        }
    }
    for d in 0..2 {
        check(
            (o2.k_opt[d] / best.1[d] - 1.0).abs() <= 0.10,
            format!("2-D k = {:?} vs grid {:?}", o2.k_opt, best.1),
        )?;
    }
    let s = within_time(t0, 30.0)?;
    Ok(format!(
        "k = {k:.4}, gain {:.3}% (oracle {oracle:.3}%); 2-D k = ({:.3}, {:.3}) vs grid ({:.3}, {:.3}) [{s:.2} s]",
        o.bd_rate_gain, o2.k_opt[0], o2.k_opt[1], best.1[0], best.1[1]
    ))
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let spec = SyntheticCodecSpec::default();
    let gw = SyntheticGateway::new(spec.clone()).unwrap();
    let settings = spec.settings();
    let mut cases = Vec::new();
    let mut failures = Vec::new();
    for (w, h) in [(640, 360), (1280, 720), (1920, 1080)] {
        let src = meta("p", w, h);
        let base = rd_curve(&gw, &src, &settings, &[], QualityMetric::Psnr)
            .unwrap()
            .wall_time;
        let direct = optimize_k(&gw, &src, &settings, &LambdaSearchConfig::default()).map_err(|e| e.to_string())?;
        for strategy in [ProxyStrategy::FastPreset, ProxyStrategy::Downsample] {
            let cfg = LambdaSearchConfig {
                proxy: strategy,
                ..LambdaSearchConfig::default()
            };
            let o = optimize_with_proxy(&gw, &src, &settings, &cfg).map_err(|e| e.to_string())?;
            let share = o.bd_rate_gain / direct.bd_rate_gain;
            // The default-settings encode both searches start from is
            // shared, so it is left out of both costs.
            let time = (o.wall_time - base) / (direct.wall_time - base);
            let line = format!("{h}p {strategy} {:.0}%/{:.1}%", 100.0 * share, 100.0 * time);
            // Downsampling only reaches a fifth of the pixels on the 720p to
            // 144p path; elsewhere it is reported, not held to the bound.
            let held = strategy == ProxyStrategy::FastPreset || h == 720;
            if held && (share < 0.8 || time >= 0.2) {
                failures.push(line.clone());
            }
            cases.push(if held { line } else { format!("{line} (reported)") });
        }
    }
    check(failures.is_empty(), format!("below target: {}", failures.join(", ")))?;
    let s = within_time(t0, 60.0)?;
    Ok(format!("{} [{s:.2} s]", cases.join(", ")))
}

// Criterion 5 ----------------------------------------------------------

fn criterion_5() -> Outcome {
    use clipforge::preproc_opt::{argmax_strengths, fit_policy, run_sweep, ArgmaxEntry, SweepGrid, ToyRateEncoder};
    use clipforge::video_io::synth;
    let t0 = Instant::now();
    let clips = vec![
        synth::textured_clip(128, 128, 12, 30, 1),
        synth::textured_clip(128, 128, 12, 30, 2),
    ];
    let grid = SweepGrid {
        psnr_levels: vec![27.5, f64::INFINITY],
        ..SweepGrid::default()
    };
    let top = *grid.bitrates.last().unwrap();
    let s_max = *grid.strengths.last().unwrap();
    let sweep = run_sweep(&clips, &ToyRateEncoder, &grid, 5).map_err(|e| e.to_string())?;
    check(sweep.holes().is_empty(), "sweep has holes")?;
    let row = |level: f64| -> Vec<(f64, f64)> {
        sweep
            .cells
            .iter()
            .filter(|c| c.psnr_level == level && c.bitrate == top)
            .map(|c| (c.strength, c.final_psnr.unwrap()))
            .collect()
    };
    let noisy = row(27.5);
    let at_zero = noisy[0].1;
    let (best_s, best_q) = noisy
        .iter()
        .filter(|(s, _)| *s > 0.0 && *s < s_max)
        .fold((0.0, f64::NEG_INFINITY), |a, &(s, q)| if q > a.1 { (s, q) } else { a });
    check(
        best_q - at_zero >= 0.5,
        format!("best interior strength {best_s:.2} gains {:.3} dB", best_q - at_zero),
    )?;
    let clean = argmax_strengths(&sweep)
        .into_iter()
        .find(|e| e.psnr_level.is_infinite() && e.bitrate == top)
        .ok_or("no clean row")?;
    check(
        clean.strength == 0.0,
        format!("clean input picks strength {}", clean.strength),
    )?;

    // Plant a degree-5 policy and recover it.
    let mut table = Vec::new();
    for sigma in [2.0, 4.0, 6.5, 10.0, 16.0, 25.0] {
        for rate in [256.0f64, 512.0, 1024.0, 2048.0, 4096.0, 8192.0] {
            let u = (sigma - 2.0) / 23.0 * 2.0 - 1.0;
            let v = (rate.ln() - 256f64.ln()) / (8192f64.ln() - 256f64.ln()) * 2.0 - 1.0;
            table.push(ArgmaxEntry {
                psnr_level: 0.0,
                sigma,
                bitrate: rate,
                strength: 12.0 + 4.0 * u - 3.0 * v + u.powi(3) * v.powi(2) - 0.5 * v.powi(5) + 0.25 * u.powi(4) * v,
                final_psnr: 0.0,
            });
        }
    }
    let policy = fit_policy(&table, 100.0).map_err(|e| e.to_string())?;
    check(
        policy.residual_rmse <= 1e-8,
        format!("plant residual {}", policy.residual_rmse),
    )?;
    let s = within_time(t0, 180.0)?;
    Ok(format!(
        "at {top} kbps strength {best_s:.2} beats 0 by {:.2} dB, clean input picks 0, plant residual {:.1e} [{s:.1} s]",
        best_q - at_zero,
        policy.residual_rmse
    ))
}

// Criterion 6 ----------------------------------------------------------

fn criterion_6() -> Outcome {
    use clipforge::video_io::{add_gaussian_noise, sigma_for_target_psnr, synth};
    let t0 = Instant::now();
    let clean = synth::constant_clip(256, 256, 10, 30, 128);
    let mut parts = Vec::new();
    for (i, target) in [20.0, 27.5, 40.0].into_iter().enumerate() {
        let sigma = sigma_for_target_psnr(target).map_err(|e| e.to_string())?;
        let noisy = add_gaussian_noise(&clean, sigma, 77 + i as u64).map_err(|e| e.to_string())?;
        let p = psnr(&clean, &noisy).map_err(|e| e.to_string())?;
        check(
            (p - target).abs() <= 0.3,
            format!("target {target} dB measured {p:.3} dB"),
        )?;
        parts.push(format!("{target} -> {p:.3}"));
    }
    let s = within_time(t0, 5.0)?;
    Ok(format!("{} dB [{s:.2} s]", parts.join(", ")))
}

// Criteria 7 and 8 ------------------------------------------------------

fn criterion_7() -> Outcome {
    use clipforge::learn::GbtParams;
    use clipforge::load_predict::synth::{generate_time_samples, TimeLaw};
    use clipforge::load_predict::{evaluate, split_dataset, train_time_model, EvalSpace, SplitMode, TargetTransform};
    let t0 = Instant::now();
    let law = TimeLaw::default();
    let clean = generate_time_samples(600, &law, 0.0, 1);
    let (train, test) = split_dataset(&clean, SplitMode::Overfit, 0.7, 1).unwrap();
    let m = train_time_model(&train, TargetTransform::Log, GbtParams::default(), 1).map_err(|e| e.to_string())?;
    let r2 = evaluate(&m, &train, EvalSpace::Log)
        .map_err(|e| e.to_string())?
        .r2
        .unwrap_or(0.0);
    check(r2 >= 0.99, format!("noiseless log-space training R² {r2:.4}"))?;
    let held = evaluate(&m, &test, EvalSpace::Log)
        .map_err(|e| e.to_string())?
        .r2
        .unwrap_or(0.0);
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..5 {
        let s = generate_time_samples(600, &law, 0.3, seed);
        let (train, test) = split_dataset(&s, SplitMode::Overfit, 0.7, seed).unwrap();
        let lin =
            train_time_model(&train, TargetTransform::Linear, GbtParams::default(), seed).map_err(|e| e.to_string())?;
        let log =
            train_time_model(&train, TargetTransform::Log, GbtParams::default(), seed).map_err(|e| e.to_string())?;
        let a = evaluate(&log, &test, EvalSpace::LogToLinear).unwrap().mae_pct;
        let b = evaluate(&lin, &test, EvalSpace::Linear).unwrap().mae_pct;
        if a < b {
            wins += 1;
        }
        pairs.push(format!("{a:.1}/{b:.1}"));
    }
    check(
        wins == 5,
        format!("log->linear below linear on {wins}/5 seeds ({})", pairs.join(" ")),
    )?;
    let s = within_time(t0, 30.0)?;
    Ok(format!(
        "training R² {r2:.4} (holdout {held:.4}); MAE% log->linear/linear {} [{s:.2} s]",
        pairs.join(" ")
    ))
}

fn criterion_8() -> Outcome {
    use clipforge::learn::SvmParams;
    use clipforge::load_predict::synth::{generate_time_samples, TimeLaw};
    use clipforge::load_predict::{
        classifier_report, make_bins, split_dataset, train_duration_classifier, BinMode, SplitMode,
    };
    let t0 = Instant::now();
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..5 {
        let s = generate_time_samples(600, &TimeLaw::default(), 0.3, 500 + seed);
        let (train, test) = split_dataset(&s, SplitMode::Overfit, 0.7, seed).unwrap();
        let (lo, hi) = train.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| {
            (l.min(x.measured_seconds), h.max(x.measured_seconds))
        });
        let recall = |mode| -> Result<f64, String> {
            let bins = make_bins(mode, 6, lo, hi).map_err(|e| e.to_string())?;
            let (clf, _) =
                train_duration_classifier(&train, &bins, SvmParams::default(), seed).map_err(|e| e.to_string())?;
            Ok(classifier_report(&clf, &test).macro_recall)
        };
        let (g, l) = (recall(BinMode::Geometric)?, recall(BinMode::Linear)?);
        if g >= l {
            wins += 1;
        }
        pairs.push(format!("{g:.2}/{l:.2}"));
    }
    check(
        wins >= 4,
        format!("geometric ahead on {wins}/5 seeds ({})", pairs.join(" ")),
    )?;
    let s = t0.elapsed().as_secs_f64();
    Ok(format!(
        "geometric >= linear on {wins}/5 seeds, macro recall {} [{s:.2} s]",
        pairs.join(" ")
    ))
}

// Criterion 9 ----------------------------------------------------------

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases: [(&str, &str, f64); 5] = [
        ("basic", "h264", 0.15),
        ("professional_speed", "h264", 0.24),
        ("professional_quality", "h264", 0.42),
        ("professional_speed", "hevc", 0.48),
        ("professional_quality", "hevc", 3.3),
    ];
    for (i, &(tier, codec, want)) in cases.iter().enumerate() {
        let out = format!("o{i}");
        let r = common::clipforge(
            dir.path(),
            &[
                "--out",
                &out,
                "timepred",
                "predict",
                "--price",
                "per_minute",
                "--tier",
                tier,
                "--codec",
                codec,
                "--duration",
                "600",
                "--height",
                "1080",
                "--fps",
                "30",
            ],
        );
        check(r.code == 0, format!("{tier}/{codec}: exit {} {}", r.code, r.stderr))?;
        let j = common::json(dir.path().join(&out).join("predictions.json"));
        let got = j["predictions"][0]["cost"]["total"].as_f64().ok_or("no cost")?;
        check(
            got.to_bits() == want.to_bits(),
            format!("{tier}/{codec}: {got} != {want}"),
        )?;
    }
    Ok("$0.15, $0.24/$0.42, $0.48/$3.3 bit-exact through `timepred predict`".into())
}

// Criterion 10 ---------------------------------------------------------

fn criterion_10() -> Outcome {
    use clipforge::video_io::{parse_y4m, synth, write_y4m, ChromaSampling};
    let mut rng = seeded(10);
    for i in 0..100 {
        let sampling = [ChromaSampling::Cs420, ChromaSampling::Cs422, ChromaSampling::Cs444][i % 3];
        let (w, h, n) = (rng.random_range(1..48), rng.random_range(1..40), rng.random_range(1..5));
        let fps = rng.random_range(1..121);
        let clip = synth::random_clip_with(w, h, n, fps, sampling, 1000 + i as u64);
        let bytes = write_y4m(&clip);
        let back = parse_y4m(&bytes).map_err(|e| format!("clip {i}: {e}"))?;
        check(back.frames() == clip.frames(), format!("clip {i}: pixels differ"))?;
        check(write_y4m(&back) == bytes, format!("clip {i}: bytes differ"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    let script: &[&[&str]] = &[
        &[
            "optimize-lambda",
            "--synthetic",
            "a=1280x720x60",
            "b=640x360x30",
            "c=1920x1080x24@24",
            "d=320x240x90",
        ],
        &[
            "optimize-lambda",
            "--synthetic",
            "--proxy",
            "downsample",
            "--dims",
            "2",
            "--planted-k",
            "3,0.5",
            "a=1280x720x60",
            "b=854x480x30",
        ],
        &[
            "preproc",
            "sweep",
            "--synthetic-clips",
            "3",
            "--size",
            "32x32x3",
            "--levels",
            "25,35",
            "--bitrates",
            "100,400",
            "--strengths",
            "0,6,12",
        ],
        &["timepred", "synth", "--n", "200", "--noise", "0.3"],
    ];
    // Each worker count runs in its own directory so the relative input
    // paths echoed into reports are the same.
    let mut compared = 0;
    for workers in ["1", "8"] {
        let cwd = p.join(format!("w{workers}"));
        std::fs::create_dir_all(&cwd).map_err(|e| e.to_string())?;
        let run = |args: &[&str]| -> Result<(), String> {
            let mut full = vec!["--workers", workers, "--seed", "17"];
            full.extend_from_slice(args);
            let r = common::clipforge(&cwd, &full);
            check(r.code == 0, format!("{args:?}: {}", r.stderr))
        };
        for (i, args) in script.iter().enumerate() {
            let out = i.to_string();
            let mut full = vec!["--out", out.as_str()];
            full.extend_from_slice(args);
            run(&full)?;
        }
        run(&[
            "--out",
            "model",
            "timepred",
            "train",
            "--data",
            "3/samples.csv",
            "--split",
            "generalised",
        ])?;
        run(&[
            "--out",
            "eval",
            "timepred",
            "eval",
            "--model",
            "model/time_model.json",
            "--data",
            "model/test.csv",
        ])?;
        run(&[
            "--out",
            "classes",
            "timepred",
            "classify",
            "--data",
            "model/train.csv",
            "--test",
            "model/test.csv",
        ])?;
    }
    for sub in ["0", "1", "2", "3", "model", "eval", "classes"] {
        let a = common::tree(&p.join("w1").join(sub));
        let b = common::tree(&p.join("w8").join(sub));
        check(
            !a.is_empty() && a == b,
            format!("run {sub} differs between 1 and 8 workers"),
        )?;
        compared += a.len();
    }
    // Retraining with the same seed reproduces model and reports.
    let w1 = p.join("w1");
    for (out, args) in [
        (
            "model2",
            ["timepred", "train", "--data", "3/samples.csv", "--split", "generalised"].as_slice(),
        ),
        (
            "classes2",
            [
                "timepred",
                "classify",
                "--data",
                "model/train.csv",
                "--test",
                "model/test.csv",
            ]
            .as_slice(),
        ),
    ] {
        let mut full = vec!["--seed", "17", "--out", out];
        full.extend_from_slice(args);
        let r = common::clipforge(&w1, &full);
        check(r.code == 0, r.stderr)?;
        let first = out.trim_end_matches('2');
        check(
            common::tree(&w1.join(out)) == common::tree(&w1.join(first)),
            format!("{out} is not reproducible"),
        )?;
    }
    Ok(format!(
        "100 Y4M round trips exact; {compared} files identical under 1 and 8 workers; retraining reproducible"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("BD-rate oracle equivalence", criterion_1),
        ("optimizer correctness", criterion_2),
        ("planted-k recovery", criterion_3),
        ("proxy efficacy", criterion_4),
        ("pre-processor shape", criterion_5),
        ("noise calibration", criterion_6),
        ("time-predictor fidelity", criterion_7),
        ("binning direction", criterion_8),
        ("pricing exactness", criterion_9),
        ("determinism and parsing", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let r = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
