pub mod bdrate;
pub mod lambda;
pub mod plot;
pub mod preproc;
pub mod timepred;

use std::fmt;
use std::path::Path;

use anyhow::Context;

use crate::config::JobConfig;
use crate::output::Outputs;

pub struct Ctx {
    pub cfg: JobConfig,
    pub out: Outputs,
    pub seed: u64,
}

/// How a batch command ended. Individual task failures are recorded in
/// the manifest; the run fails only when every task failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Done,
    AllFailed,
}

/// Bad flags, arguments or configuration (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl UsageError {
    pub fn msg(m: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(UsageError(m.into()))
    }

    pub fn wrap(e: anyhow::Error) -> anyhow::Error {
        Self::msg(format!("{e:#}"))
    }
}

pub fn open(path: &Path) -> anyhow::Result<std::fs::File> {
    std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))
}

/// Source ids double as file names.
pub fn file_key(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "clip".into()
    } else {
        s
    }
}

/// `WIDTHxHEIGHT` or `WIDTHxHEIGHTxFRAMES`.
pub fn parse_dims(s: &str) -> anyhow::Result<Vec<usize>> {
    let v = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| UsageError::msg(format!("bad size `{s}` (expected e.g. 128x128x12)")))?;
    if !(2..=3).contains(&v.len()) || v.contains(&0) {
        return Err(UsageError::msg(format!("bad size `{s}` (expected e.g. 128x128x12)")));
    }
    Ok(v)
}

/// Flat records as CSV with a header row.
pub fn csv_bytes<T: serde::Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))
}

/// `value` as a JSON object with the run seed added.
pub fn with_seed<T: serde::Serialize>(value: &T, seed: u64) -> anyhow::Result<serde_json::Value> {
    let mut v = serde_json::to_value(value)?;
    if let Some(m) = v.as_object_mut() {
        m.insert("seed".into(), seed.into());
    }
    Ok(v)
}
