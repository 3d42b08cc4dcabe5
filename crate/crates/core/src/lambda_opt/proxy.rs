use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{bd_cost, optimize_k, LambdaError, LambdaSearchConfig, LambdaSearchOutcome, NO_IMPROVEMENT};
use crate::codec_gateway::{rd_curve, EncodeSettings, Gateway, SourceClip};
use crate::video_io::{downscale_to, proxy_resolution, ClipMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyStrategy {
    #[default]
    None,
    /// Search on a low-resolution copy of the clip.
    Downsample,
    /// Search with the fastest preset on the encoder's ladder.
    FastPreset,
}

impl fmt::Display for ProxyStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProxyStrategy::None => "none",
            ProxyStrategy::Downsample => "downsample",
            ProxyStrategy::FastPreset => "fast_preset",
        })
    }
}

impl FromStr for ProxyStrategy {
    type Err = LambdaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(ProxyStrategy::None),
            "downsample" => Ok(ProxyStrategy::Downsample),
            "fast_preset" => Ok(ProxyStrategy::FastPreset),
            other => Err(LambdaError::Config(format!("unknown proxy strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub strategy: ProxyStrategy,
    pub proxy_width: usize,
    pub proxy_height: usize,
    pub proxy_preset: String,
    pub proxy_k: Vec<f64>,
    /// BD-rate the search saw on the proxy.
    pub proxy_gain: f64,
    pub proxy_encodes: usize,
    pub proxy_wall_time: f64,
    /// Baseline plus test curve at full fidelity.
    pub full_encodes: usize,
    pub full_wall_time: f64,
}

/// Cheaper stand-in for `src`/`settings` under `strategy`.
pub fn make_proxy(
    src: &SourceClip,
    settings: &EncodeSettings,
    strategy: ProxyStrategy,
) -> Result<(SourceClip, EncodeSettings), LambdaError> {
    match strategy {
        ProxyStrategy::None => Err(LambdaError::Config("no proxy strategy selected".into())),
        ProxyStrategy::FastPreset => {
            let fastest = settings
                .fastest_preset()
                .ok_or_else(|| LambdaError::Config("encoder has no preset ladder".into()))?;
            Ok((src.clone(), settings.with_preset(fastest)))
        }
        ProxyStrategy::Downsample => {
            let m = &src.meta;
            let (w, h) = proxy_resolution(m.width, m.height).map_err(|e| LambdaError::Config(e.to_string()))?;
            if (w, h) == (m.width, m.height) {
                warn!("{}: {}x{} is already at proxy resolution", m.source_id, w, h);
                return Ok((src.clone(), settings.clone()));
            }
            let meta = ClipMeta {
                width: w,
                height: h,
                ..m.clone()
            };
            let clip = match &src.clip {
                Some(c) => Some(Arc::new(
                    c.map_frames(|f| downscale_to(f, w, h).expect("proxy geometry is valid"))
                        .map_err(|e| LambdaError::Config(e.to_string()))?,
                )),
                None => None,
            };
            Ok((SourceClip { meta, clip, path: None }, settings.clone()))
        }
    }
}

/// Search k on the proxy selected by `config.proxy`, then measure the found
/// k once at full fidelity (one baseline and one test curve).
pub fn optimize_with_proxy<G: Gateway + ?Sized>(
    gateway: &G,
    src: &SourceClip,
    settings: &EncodeSettings,
    config: &LambdaSearchConfig,
) -> Result<LambdaSearchOutcome, LambdaError> {
    config.validate()?;
    let (psrc, psettings) = make_proxy(src, settings, config.proxy)?;
    let found = optimize_k(gateway, &psrc, &psettings, config)?;

    let base = rd_curve(gateway, src, settings, &[], config.metric)?;
    let (mut full_encodes, mut full_wall) = (base.encodes, base.wall_time);
    let mut gain = 0.0;
    if found.k_opt.iter().any(|k| *k != 1.0) {
        let (cost, run) = bd_cost(gateway, src, settings, &found.k_opt, &base.curve, config.metric)?;
        full_encodes += run.encodes;
        full_wall += run.wall_time;
        gain = cost;
    }
    let report = ProxyReport {
        strategy: config.proxy,
        proxy_width: psrc.meta.width,
        proxy_height: psrc.meta.height,
        proxy_preset: psettings.preset.clone(),
        proxy_k: found.k_opt.clone(),
        proxy_gain: found.bd_rate_gain,
        proxy_encodes: found.total_encodes,
        proxy_wall_time: found.wall_time,
        full_encodes,
        full_wall_time: full_wall,
    };
    let (k_opt, gain, terminated) = if gain < 0.0 {
        (found.k_opt, gain, found.terminated_early)
    } else {
        (vec![1.0; config.dims], 0.0, Some(NO_IMPROVEMENT.to_string()))
    };
    Ok(LambdaSearchOutcome {
        source_id: src.id().to_string(),
        k_opt,
        bd_rate_gain: gain,
        total_encodes: found.total_encodes + full_encodes,
        wall_time: found.wall_time + full_wall,
        terminated_early: terminated,
        proxy: Some(report),
        ..found
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::meta_src;
    use super::*;
    use crate::codec_gateway::{builtin_profile, SyntheticCodecSpec, SyntheticGateway};
    use crate::video_io::synth;

    #[test]
    fn proxy_geometry_and_preset() {
        let s = SyntheticCodecSpec::default().settings();
        let (p, _) = make_proxy(&meta_src(1280, 720), &s, ProxyStrategy::Downsample).unwrap();
        assert_eq!((p.meta.width, p.meta.height), (256, 144));
        let (p, _) = make_proxy(&meta_src(256, 144), &s, ProxyStrategy::Downsample).unwrap();
        assert_eq!((p.meta.width, p.meta.height), (256, 144));
        let aom = builtin_profile("libaom-av1").unwrap().settings();
        let (_, ps) = make_proxy(&meta_src(640, 360), &aom, ProxyStrategy::FastPreset).unwrap();
        assert_eq!(ps.preset, "6");
        assert!(make_proxy(&meta_src(640, 360), &s, ProxyStrategy::None).is_err());
    }

    #[test]
    fn pixels_are_downscaled() {
        let src = SourceClip::from_clip(synth::textured_clip(320, 180, 2, 30, 1));
        let (p, _) = make_proxy(
            &src,
            &SyntheticCodecSpec::default().settings(),
            ProxyStrategy::Downsample,
        )
        .unwrap();
        let c = p.clip.unwrap();
        assert_eq!((c.width(), c.height(), c.len()), (256, 144, 2));
    }

    #[test]
    fn shared_optimum_proxy_keeps_gain() {
        let spec = SyntheticCodecSpec::default();
        let gw = SyntheticGateway::new(spec.clone()).unwrap();
        let src = meta_src(1280, 720);
        let direct = optimize_k(&gw, &src, &spec.settings(), &LambdaSearchConfig::default()).unwrap();
        for strategy in [ProxyStrategy::Downsample, ProxyStrategy::FastPreset] {
            let cfg = LambdaSearchConfig {
                proxy: strategy,
                ..Default::default()
            };
            let o = optimize_with_proxy(&gw, &src, &spec.settings(), &cfg).unwrap();
            assert!(
                o.bd_rate_gain <= 0.9 * direct.bd_rate_gain,
                "{strategy}: {}",
                o.bd_rate_gain
            );
            assert!(o.wall_time < direct.wall_time, "{strategy}");
            let r = o.proxy.unwrap();
            assert_eq!(r.full_encodes, 2 * spec.qp_list.len());
            assert_eq!(o.total_encodes, r.proxy_encodes + r.full_encodes);
        }
    }

    #[test]
    fn disagreeing_proxy_still_gains() {
        let spec = SyntheticCodecSpec {
            preset_k_star_scale: [("fast".to_string(), 1.2)].into_iter().collect(),
            ..Default::default()
        };
        let gw = SyntheticGateway::new(spec.clone()).unwrap();
        let src = meta_src(1280, 720);
        let cfg = LambdaSearchConfig {
            proxy: ProxyStrategy::FastPreset,
            ..Default::default()
        };
        let direct = optimize_k(&gw, &src, &spec.settings(), &LambdaSearchConfig::default()).unwrap();
        let o = optimize_with_proxy(&gw, &src, &spec.settings(), &cfg).unwrap();
        assert!(o.bd_rate_gain < 0.0);
        assert!(o.bd_rate_gain > direct.bd_rate_gain);
        assert!((o.proxy.unwrap().proxy_k[0] / 2.4 - 1.0).abs() < 0.05);
    }
}
