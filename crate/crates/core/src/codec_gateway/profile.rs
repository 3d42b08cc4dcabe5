use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CodecError;

/// Substitution points in command templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Placeholder {
    Input,
    Output,
    Qp,
    Preset,
    K1,
    K2,
    Bitrate,
    Decoded,
    Stats,
}

impl Placeholder {
    pub const ALL: [Placeholder; 9] = [
        Placeholder::Input,
        Placeholder::Output,
        Placeholder::Qp,
        Placeholder::Preset,
        Placeholder::K1,
        Placeholder::K2,
        Placeholder::Bitrate,
        Placeholder::Decoded,
        Placeholder::Stats,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Placeholder::Input => "{INPUT}",
            Placeholder::Output => "{OUTPUT}",
            Placeholder::Qp => "{QP}",
            Placeholder::Preset => "{PRESET}",
            Placeholder::K1 => "{K1}",
            Placeholder::K2 => "{K2}",
            Placeholder::Bitrate => "{BITRATE}",
            Placeholder::Decoded => "{DECODED}",
            Placeholder::Stats => "{STATS}",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| &p.token()[1..p.token().len() - 1] == name)
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Placeholders used by a template, in first-use order.
pub fn template_placeholders(template: &str) -> Result<Vec<Placeholder>, CodecError> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let tail = &rest[open + 1..];
        let close = tail
            .find('}')
            .ok_or_else(|| CodecError::Template(format!("unclosed `{{` in `{template}`")))?;
        let name = &tail[..close];
        let p = Placeholder::from_name(name)
            .ok_or_else(|| CodecError::Template(format!("unknown placeholder `{{{name}}}`")))?;
        if !out.contains(&p) {
            out.push(p);
        }
        rest = &tail[close + 1..];
    }
    Ok(out)
}

/// Split a template on whitespace and substitute placeholders inside each
/// token. No shell is involved, so values are never re-split or expanded.
pub fn render_template(template: &str, values: &BTreeMap<Placeholder, String>) -> Result<Vec<String>, CodecError> {
    for p in template_placeholders(template)? {
        if !values.contains_key(&p) {
            return Err(CodecError::Template(format!("no value for {p} in `{template}`")));
        }
    }
    let argv: Vec<String> = template
        .split_whitespace()
        .map(|tok| {
            let mut t = tok.to_string();
            for (p, v) in values {
                t = t.replace(p.token(), v);
            }
            t
        })
        .collect();
    if argv.is_empty() {
        return Err(CodecError::Template("empty command template".into()));
    }
    Ok(argv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderProfile {
    pub name: String,
    pub command_template: String,
    pub qp_list: Vec<u32>,
    /// Frame groups addressed by successive k entries (`{K1}`, `{K2}`).
    #[serde(default)]
    pub frame_groups: Vec<String>,
    /// Fastest first.
    #[serde(default)]
    pub preset_ladder: Vec<String>,
    #[serde(default)]
    pub default_preset: Option<String>,
    /// Turns `{OUTPUT}` into a Y4M at `{DECODED}`.
    #[serde(default)]
    pub decode_command_template: Option<String>,
    #[serde(default = "default_extension")]
    pub output_extension: String,
}

fn default_extension() -> String {
    "bin".into()
}

impl EncoderProfile {
    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |reason: String| CodecError::Profile {
            name: self.name.clone(),
            reason,
        };
        let used = template_placeholders(&self.command_template)?;
        for p in [Placeholder::Input, Placeholder::Output] {
            if !used.contains(&p) {
                return Err(bad(format!("command template lacks {p}")));
            }
        }
        if !used.contains(&Placeholder::Qp) && !used.contains(&Placeholder::Bitrate) {
            return Err(bad("command template needs {QP} or {BITRATE}".into()));
        }
        if self.qp_list.len() < 4 {
            return Err(bad(format!(
                "qp_list needs at least 4 entries, has {}",
                self.qp_list.len()
            )));
        }
        if self.qp_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("qp_list must be strictly increasing".into()));
        }
        let k_slots = used
            .iter()
            .filter(|p| matches!(p, Placeholder::K1 | Placeholder::K2))
            .count();
        if k_slots > self.frame_groups.len() {
            return Err(bad(format!(
                "{k_slots} k placeholders but only {} frame groups",
                self.frame_groups.len()
            )));
        }
        if let Some(p) = &self.default_preset {
            if !self.preset_ladder.is_empty() && !self.preset_ladder.contains(p) {
                return Err(bad(format!("default preset `{p}` is not on the ladder")));
            }
        }
        if let Some(d) = &self.decode_command_template {
            let dp = template_placeholders(d)?;
            if !dp.contains(&Placeholder::Output) || !dp.contains(&Placeholder::Decoded) {
                return Err(bad("decode template needs {OUTPUT} and {DECODED}".into()));
            }
        }
        Ok(())
    }

    /// Number of k entries the template consumes.
    pub fn k_slots(&self) -> usize {
        template_placeholders(&self.command_template)
            .map(|u| {
                u.iter()
                    .filter(|p| matches!(p, Placeholder::K1 | Placeholder::K2))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn settings(&self) -> EncodeSettings {
        EncodeSettings {
            qp_list: self.qp_list.clone(),
            preset: self
                .default_preset
                .clone()
                .or_else(|| self.preset_ladder.last().cloned())
                .unwrap_or_default(),
            preset_ladder: self.preset_ladder.clone(),
            frame_groups: self.frame_groups.clone(),
        }
    }
}

/// What an RD sweep needs to know about the encoder, independent of how
/// encodes are performed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeSettings {
    pub qp_list: Vec<u32>,
    pub preset: String,
    /// Fastest first.
    pub preset_ladder: Vec<String>,
    pub frame_groups: Vec<String>,
}

impl EncodeSettings {
    pub fn fastest_preset(&self) -> Option<&str> {
        self.preset_ladder.first().map(String::as_str)
    }

    pub fn with_preset(&self, preset: impl Into<String>) -> Self {
        Self {
            preset: preset.into(),
            ..self.clone()
        }
    }
}

const FFMPEG_DECODE: &str = "ffmpeg -v error -y -i {OUTPUT} -f yuv4mpegpipe -strict -1 {DECODED}";

fn ladder(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Stock configurations of the four encoders studied. Stock binaries take
/// no λ scale, so these templates carry no k placeholders; copy one and add
/// `{K1}`/`{K2}` for a patched build.
pub fn builtin_profiles() -> Vec<EncoderProfile> {
    let x26x_ladder = ladder(&[
        "ultrafast",
        "superfast",
        "veryfast",
        "faster",
        "fast",
        "medium",
        "slow",
        "slower",
        "veryslow",
        "placebo",
    ]);
    vec![
        EncoderProfile {
            name: "x264".into(),
            command_template: "x264 --threads 1 --preset {PRESET} --crf {QP} --output {OUTPUT} {INPUT}".into(),
            qp_list: vec![22, 27, 32, 37, 42],
            frame_groups: vec!["all".into()],
            preset_ladder: x26x_ladder.clone(),
            default_preset: Some("medium".into()),
            decode_command_template: Some(FFMPEG_DECODE.into()),
            output_extension: "264".into(),
        },
        EncoderProfile {
            name: "x265".into(),
            command_template:
                "x265 --pools 1 --frame-threads 1 --preset {PRESET} --input {INPUT} --crf {QP} --output {OUTPUT}".into(),
            qp_list: vec![22, 27, 32, 37, 42],
            frame_groups: vec!["all".into()],
            preset_ladder: x26x_ladder,
            default_preset: Some("medium".into()),
            decode_command_template: Some(FFMPEG_DECODE.into()),
            output_extension: "hevc".into(),
        },
        EncoderProfile {
            name: "libaom-av1".into(),
            command_template: "aomenc --cpu-used={PRESET} --passes=1 --lag-in-frames=19 --auto-alt-ref=1 \
                               --min-gf-interval=16 --max-gf-interval=16 --gf-min-pyr-height=4 \
                               --gf-max-pyr-height=4 --kf-min-dist=65 --kf-max-dist=65 \
                               --use-fixed-qp-offsets=1 --deltaq-mode=0 --enable-tpl-model=0 \
                               --end-usage=q --cq-level={QP} --enable-keyframe-filtering=0 --threads=1 \
                               --test-decode=fatal -o {OUTPUT} {INPUT}"
                .into(),
            qp_list: vec![27, 39, 49, 59, 63],
            frame_groups: vec!["KF".into(), "GF/ARF".into()],
            preset_ladder: ladder(&["6", "5", "4", "3", "2", "1", "0"]),
            default_preset: Some("0".into()),
            decode_command_template: Some(FFMPEG_DECODE.into()),
            output_extension: "ivf".into(),
        },
        EncoderProfile {
            name: "svt-av1".into(),
            command_template: "SvtAv1EncApp --lp 1 --crf {QP} --preset {PRESET} -i {INPUT} -b {OUTPUT}".into(),
            qp_list: vec![27, 33, 39, 46, 52, 58],
            frame_groups: vec!["GF/ARF".into(), "Inter".into()],
            preset_ladder: ladder(&["13", "12", "11", "10", "9", "8", "7", "6", "5", "4", "3", "2", "1", "0"]),
            default_preset: Some("9".into()),
            decode_command_template: Some(FFMPEG_DECODE.into()),
            output_extension: "ivf".into(),
        },
    ]
}

pub fn builtin_profile(name: &str) -> Option<EncoderProfile> {
    builtin_profiles().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        for p in builtin_profiles() {
            p.validate().unwrap();
            assert_eq!(p.k_slots(), 0);
        }
        assert_eq!(
            builtin_profile("libaom-av1").unwrap().settings().fastest_preset(),
            Some("6")
        );
        assert_eq!(builtin_profile("svt-av1").unwrap().qp_list.len(), 6);
    }

    #[test]
    fn render_is_tokenwise() {
        let mut v = BTreeMap::new();
        v.insert(Placeholder::Input, "/tmp/a b.y4m".to_string());
        v.insert(Placeholder::Output, "/o.bin".to_string());
        v.insert(Placeholder::Qp, "32".to_string());
        let argv = render_template("enc --in={INPUT} -q {QP} {OUTPUT}", &v).unwrap();
        assert_eq!(argv, vec!["enc", "--in=/tmp/a b.y4m", "-q", "32", "/o.bin"]);
        assert!(render_template("enc {K1}", &v).is_err());
        assert!(render_template("enc {NOPE}", &v).is_err());
    }

    #[test]
    fn validation_failures() {
        let mut p = builtin_profile("x264").unwrap();
        p.command_template = "x264 {INPUT} {QP}".into();
        assert!(p.validate().is_err());
        let mut p = builtin_profile("x264").unwrap();
        p.qp_list = vec![22, 27, 27, 32];
        assert!(p.validate().is_err());
        let mut p = builtin_profile("x264").unwrap();
        p.command_template.push_str(" --k1 {K1} --k2 {K2}");
        assert!(p.validate().is_err());
        p.frame_groups.push("B".into());
        p.validate().unwrap();
        assert_eq!(p.k_slots(), 2);
    }
}
