#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run the binary in `cwd` with `args`.
pub fn clipforge(cwd: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_clipforge"))
        .current_dir(cwd)
        .args(args)
        .env_remove("CLIPFORGE_WORKERS")
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn clipforge");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn ok(cwd: &Path, args: &[&str]) -> Run {
    let r = clipforge(cwd, args);
    assert_eq!(
        r.code, 0,
        "clipforge {args:?}\nstdout: {}\nstderr: {}",
        r.stdout, r.stderr
    );
    r
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn json(path: impl AsRef<Path>) -> serde_json::Value {
    let p = path.as_ref();
    serde_json::from_str(&std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display())))
        .expect("valid json")
}

pub fn bless() -> bool {
    std::env::var_os("CLIPFORGE_BLESS").is_some()
}

/// RD curve of the synthetic codec (k* = 2, γ = 0.5) at multiplier `k`.
pub fn synthetic_rd_csv(k: f64) -> String {
    use clipforge::codec_gateway::{rd_curve, SourceClip, SyntheticCodecSpec, SyntheticGateway};
    use clipforge::metrics::QualityMetric;
    use clipforge::video_io::{ClipMeta, FrameRate};
    let spec = SyntheticCodecSpec::default();
    let gw = SyntheticGateway::new(spec.clone()).unwrap();
    let src = SourceClip::meta_only(ClipMeta {
        source_id: "fixture".into(),
        width: 1280,
        height: 720,
        n_frames: 60,
        frame_rate: FrameRate::new(30, 1).unwrap(),
    });
    let run = rd_curve(&gw, &src, &spec.settings(), &[k], QualityMetric::Psnr).unwrap();
    let mut buf = Vec::new();
    run.curve.write_csv(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

/// Every file under `dir` except the manifest, as (relative path, bytes).
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                if rel != "manifest.json" {
                    out.push((rel, std::fs::read(&p).unwrap()));
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
