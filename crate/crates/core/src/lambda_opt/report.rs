use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{LambdaError, LambdaSearchOutcome};

/// One Table-1-style row over a batch of clips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub encoder: String,
    pub tuning: String,
    /// Mean k per dimension.
    pub k: Vec<f64>,
    pub avg_iterations: f64,
    pub avg_bd_rate: f64,
    pub best_bd_rate: f64,
    pub clips_over_1pct: usize,
    pub clips_over_5pct: usize,
    pub clips: usize,
}

pub fn summarize(encoder: &str, tuning: &str, outcomes: &[LambdaSearchOutcome]) -> Option<BatchSummary> {
    let n = outcomes.len();
    if n == 0 {
        return None;
    }
    let dims = outcomes.iter().map(|o| o.k_opt.len()).max().unwrap_or(1);
    let k = (0..dims)
        .map(|d| {
            outcomes
                .iter()
                .map(|o| o.k_opt.get(d).copied().unwrap_or(1.0))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let gains = outcomes.iter().map(|o| o.bd_rate_gain);
    Some(BatchSummary {
        encoder: encoder.to_string(),
        tuning: tuning.to_string(),
        k,
        avg_iterations: outcomes.iter().map(|o| o.iterations as f64).sum::<f64>() / n as f64,
        avg_bd_rate: gains.clone().sum::<f64>() / n as f64,
        best_bd_rate: gains.clone().fold(0.0, f64::min),
        clips_over_1pct: gains.clone().filter(|g| *g < -1.0).count(),
        clips_over_5pct: gains.filter(|g| *g < -5.0).count(),
        clips: n,
    })
}

fn join_k(k: &[f64]) -> String {
    k.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(";")
}

fn csv_err(e: csv::Error) -> LambdaError {
    LambdaError::Data(format!("csv: {e}"))
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[BatchSummary]) -> Result<(), LambdaError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "schema_version",
        "encoder",
        "tuning",
        "k",
        "avg_iterations",
        "avg_bd_rate",
        "best_bd_rate",
        "clips_over_1pct",
        "clips_over_5pct",
        "clips",
    ])
    .map_err(csv_err)?;
    for r in rows {
        wr.write_record([
            super::OUTCOME_SCHEMA_VERSION.to_string(),
            r.encoder.clone(),
            r.tuning.clone(),
            join_k(&r.k),
            format!("{:.4}", r.avg_iterations),
            format!("{:.6}", r.avg_bd_rate),
            format!("{:.6}", r.best_bd_rate),
            r.clips_over_1pct.to_string(),
            r.clips_over_5pct.to_string(),
            r.clips.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| LambdaError::Data(e.to_string()))
}

/// Per-clip rows, sorted by source id.
pub fn write_outcomes_csv<W: Write>(w: W, outcomes: &[LambdaSearchOutcome]) -> Result<(), LambdaError> {
    let mut sorted: Vec<&LambdaSearchOutcome> = outcomes.iter().collect();
    sorted.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "schema_version",
        "source_id",
        "encoder",
        "k",
        "bd_rate_gain",
        "iterations",
        "optimizer_iterations",
        "total_encodes",
        "wall_time",
        "terminated_early",
    ])
    .map_err(csv_err)?;
    for o in sorted {
        wr.write_record([
            o.schema_version.to_string(),
            o.source_id.clone(),
            o.encoder.clone(),
            join_k(&o.k_opt),
            format!("{:.6}", o.bd_rate_gain),
            o.iterations.to_string(),
            o.optimizer_iterations.to_string(),
            o.total_encodes.to_string(),
            format!("{:.6}", o.wall_time),
            o.terminated_early.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| LambdaError::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(id: &str, k: f64, gain: f64, it: usize) -> LambdaSearchOutcome {
        LambdaSearchOutcome {
            schema_version: 1,
            source_id: id.into(),
            encoder: "x".into(),
            k_opt: vec![k],
            bd_rate_gain: gain,
            iterations: it,
            optimizer_iterations: 1,
            total_encodes: 6 * (it + 1),
            wall_time: 1.0,
            history: vec![],
            terminated_early: None,
            converged: true,
            proxy: None,
        }
    }

    #[test]
    fn table_columns() {
        let o = [
            outcome("b", 1.0, 0.0, 4),
            outcome("a", 2.0, -6.0, 10),
            outcome("c", 1.5, -1.5, 7),
        ];
        let s = summarize("x264", "All frames", &o).unwrap();
        assert_eq!(s.k, vec![1.5]);
        assert_eq!(s.avg_iterations, 7.0);
        assert_eq!(s.avg_bd_rate, -2.5);
        assert_eq!(s.best_bd_rate, -6.0);
        assert_eq!((s.clips_over_1pct, s.clips_over_5pct), (2, 1));
        let mut buf = Vec::new();
        write_outcomes_csv(&mut buf, &o).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(summarize("x", "y", &[]).is_none());
    }
}
