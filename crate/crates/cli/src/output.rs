//! Output directory bookkeeping: atomic writes, task status and the run
//! manifest, which is written last.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{Context, Result};
use clipforge::rng::fnv1a;
use serde::Serialize;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

/// Write `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".clipforge-")
        .tempfile_in(dir)
        .with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub fnv1a64: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskStatus {
    pub key: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a [String],
    seed: u64,
    workers: usize,
    config: &'a serde_json::Value,
    tasks: Vec<TaskStatus>,
    wall_seconds: f64,
    outputs: Vec<OutputEntry>,
}

/// Everything one invocation writes.
pub struct Outputs {
    dir: PathBuf,
    files: Mutex<Vec<OutputEntry>>,
    tasks: Mutex<Vec<TaskStatus>>,
    started: Instant,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir,
            files: Mutex::new(Vec::new()),
            tasks: Mutex::new(Vec::new()),
            started: Instant::now(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Atomically write `rel` under the output directory and index it.
    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(rel);
        write_atomic(&path, bytes)?;
        let mut files = self.files.lock().expect("lock");
        files.retain(|f| f.path != rel);
        files.push(OutputEntry {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            fnv1a64: format!("{:016x}", fnv1a(bytes)),
        });
        Ok(path)
    }

    /// Atomically write a file outside the output directory (a path the
    /// user named) and index it by that path.
    pub fn write_path(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        let key = path.display().to_string();
        let mut files = self.files.lock().expect("lock");
        files.retain(|f| f.path != key);
        files.push(OutputEntry {
            path: key,
            bytes: bytes.len() as u64,
            fnv1a64: format!("{:016x}", fnv1a(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    pub fn task(&self, key: impl Into<String>, result: std::result::Result<(), String>) {
        let (status, message) = match result {
            Ok(()) => ("ok", None),
            Err(m) => ("failed", Some(m)),
        };
        self.tasks.lock().expect("lock").push(TaskStatus {
            key: key.into(),
            status,
            message,
        });
    }

    /// Write the manifest; call once, after every other output.
    pub fn finish(&self, command: &[String], seed: u64, workers: usize, config: &serde_json::Value) -> Result<()> {
        let mut outputs = self.files.lock().expect("lock").clone();
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let mut tasks = self.tasks.lock().expect("lock").clone();
        tasks.sort_by(|a, b| a.key.cmp(&b.key));
        let m = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "clipforge",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            workers,
            config,
            tasks,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            outputs,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        write_atomic(&self.path(MANIFEST_NAME), s.as_bytes())
    }
}
