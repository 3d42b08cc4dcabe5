use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::MetricsError;

pub const RD_SCHEMA_VERSION: u32 = 1;

/// Largest quality inversion between rate-adjacent points that is repaired
/// by averaging instead of rejected.
pub const MAX_REPAIRABLE_INVERSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityMetric {
    #[serde(rename = "PSNR")]
    Psnr,
    #[serde(rename = "MS-SSIM")]
    MsSsim,
}

impl fmt::Display for QualityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QualityMetric::Psnr => "PSNR",
            QualityMetric::MsSsim => "MS-SSIM",
        })
    }
}

impl FromStr for QualityMetric {
    type Err = MetricsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('_', "-").as_str() {
            "PSNR" => Ok(QualityMetric::Psnr),
            "MS-SSIM" | "MSSSIM" => Ok(QualityMetric::MsSsim),
            other => Err(MetricsError::UnknownMetric(other.to_string())),
        }
    }
}

/// One encode's operating point: rate in kbps and quality in the metric's unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub rate: f64,
    pub quality: f64,
}

/// A validated rate/quality curve: at least four points, strictly increasing
/// rate, non-decreasing quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub schema_version: u32,
    pub metric: QualityMetric,
    points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    /// The same curve with every rate multiplied by `factor`.
    pub fn scale_rates(&self, factor: f64) -> RdCurve {
        RdCurve {
            schema_version: self.schema_version,
            metric: self.metric,
            points: self
                .points
                .iter()
                .map(|p| RdPoint {
                    rate: p.rate * factor,
                    quality: p.quality,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn from_json(s: &str) -> Result<RdCurve, MetricsError> {
        let raw: RdCurve = serde_json::from_str(s).map_err(|e| MetricsError::Parse(e.to_string()))?;
        build_rd_curve(
            &raw.points.iter().map(|p| (p.rate, p.quality)).collect::<Vec<_>>(),
            raw.metric,
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MetricsError> {
        write_rd_csv(w, self.metric, &self.points)
    }
}

/// Sort, validate and monotonize raw (rate, quality) samples.
///
/// Adjacent quality inversions of at most [`MAX_REPAIRABLE_INVERSION`] are
/// replaced by the mean of the pair (repeated until monotone); larger
/// inversions are errors.
pub fn build_rd_curve(samples: &[(f64, f64)], metric: QualityMetric) -> Result<RdCurve, MetricsError> {
    if samples.len() < 4 {
        return Err(MetricsError::TooFewPoints(samples.len()));
    }
    for (i, &(r, q)) in samples.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(MetricsError::InvalidPoint {
                index: i,
                reason: format!("rate {r} must be finite and positive"),
            });
        }
        if !q.is_finite() {
            return Err(MetricsError::InvalidPoint {
                index: i,
                reason: format!("quality {q} is not finite"),
            });
        }
    }
    let mut pts: Vec<RdPoint> = samples
        .iter()
        .map(|&(rate, quality)| RdPoint { rate, quality })
        .collect();
    pts.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    for w in pts.windows(2) {
        if w[0].rate == w[1].rate {
            return Err(MetricsError::DuplicateRate(w[0].rate));
        }
    }
    let n = pts.len();
    for _ in 0..n * n {
        let mut clean = true;
        for i in 0..n - 1 {
            let drop = pts[i].quality - pts[i + 1].quality;
            if drop > 0.0 {
                if drop > MAX_REPAIRABLE_INVERSION {
                    return Err(MetricsError::NonMonotone {
                        rate: pts[i + 1].rate,
                        drop,
                    });
                }
                let mean = 0.5 * (pts[i].quality + pts[i + 1].quality);
                pts[i].quality = mean;
                pts[i + 1].quality = mean;
                clean = false;
            }
        }
        if clean {
            return Ok(RdCurve {
                schema_version: RD_SCHEMA_VERSION,
                metric,
                points: pts,
            });
        }
    }
    Err(MetricsError::NonMonotone {
        rate: pts[0].rate,
        drop: f64::NAN,
    })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    rate_kbps: f64,
    quality: f64,
    metric: String,
}

/// Write raw points as `rate_kbps,quality,metric` CSV with a leading
/// `# schema_version=` comment line.
pub fn write_rd_csv<W: Write>(mut w: W, metric: QualityMetric, points: &[RdPoint]) -> Result<(), MetricsError> {
    writeln!(w, "# clipforge rd_curve schema_version={RD_SCHEMA_VERSION}")?;
    let mut wr = csv::Writer::from_writer(w);
    for p in points {
        wr.serialize(CsvRow {
            rate_kbps: p.rate,
            quality: p.quality,
            metric: metric.to_string(),
        })
        .map_err(|e| MetricsError::Parse(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// Read raw RD points from CSV without validating them as a curve.
/// Errors carry the 1-based line number of the offending row.
pub fn read_rd_points<R: Read>(r: R) -> Result<(QualityMetric, Vec<RdPoint>), MetricsError> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut metric: Option<QualityMetric> = None;
    let mut pts = Vec::new();
    for rec in rd.deserialize::<CsvRow>() {
        let row = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            MetricsError::CsvRow {
                line,
                reason: e.to_string(),
            }
        })?;
        let m: QualityMetric = row.metric.parse()?;
        match metric {
            None => metric = Some(m),
            Some(prev) if prev != m => return Err(MetricsError::MetricMismatch(prev, m)),
            _ => {}
        }
        pts.push(RdPoint {
            rate: row.rate_kbps,
            quality: row.quality,
        });
    }
    Ok((metric.unwrap_or(QualityMetric::Psnr), pts))
}

/// Read and validate an RD curve from CSV.
pub fn read_rd_csv<R: Read>(r: R) -> Result<RdCurve, MetricsError> {
    let (metric, pts) = read_rd_points(r)?;
    build_rd_curve(&pts.iter().map(|p| (p.rate, p.quality)).collect::<Vec<_>>(), metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_unsorted_samples() {
        let c = build_rd_curve(
            &[(800.0, 38.0), (100.0, 30.0), (400.0, 35.0), (200.0, 32.0)],
            QualityMetric::Psnr,
        )
        .unwrap();
        let rates: Vec<f64> = c.points().iter().map(|p| p.rate).collect();
        assert_eq!(rates, vec![100.0, 200.0, 400.0, 800.0]);
    }

    #[test]
    fn repairs_small_inversion_by_averaging() {
        let c = build_rd_curve(
            &[(100.0, 30.0), (200.0, 32.04), (400.0, 32.0), (800.0, 36.0)],
            QualityMetric::Psnr,
        )
        .unwrap();
        let q: Vec<f64> = c.points().iter().map(|p| p.quality).collect();
        assert_eq!(q[0], 30.0);
        assert!((q[1] - 32.02).abs() < 1e-12 && (q[2] - 32.02).abs() < 1e-12);
        assert_eq!(q[3], 36.0);
    }

    #[test]
    fn rejects_invalid_curves() {
        let three = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert!(matches!(
            build_rd_curve(&three, QualityMetric::Psnr),
            Err(MetricsError::TooFewPoints(3))
        ));
        let dup = [(1.0, 1.0), (2.0, 2.0), (2.0, 3.0), (4.0, 4.0)];
        assert!(matches!(
            build_rd_curve(&dup, QualityMetric::Psnr),
            Err(MetricsError::DuplicateRate(_))
        ));
        let inv = [(1.0, 1.0), (2.0, 2.0), (3.0, 1.5), (4.0, 4.0)];
        assert!(matches!(
            build_rd_curve(&inv, QualityMetric::Psnr),
            Err(MetricsError::NonMonotone { .. })
        ));
        let neg = [(1.0, 1.0), (-2.0, 2.0), (3.0, 3.0), (4.0, 4.0)];
        assert!(build_rd_curve(&neg, QualityMetric::Psnr).is_err());
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let c = build_rd_curve(
            &[(100.0, 0.9), (200.0, 0.93), (400.0, 0.95), (800.0, 0.97)],
            QualityMetric::MsSsim,
        )
        .unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# clipforge rd_curve schema_version=1\nrate_kbps,quality,metric\n"));
        assert_eq!(read_rd_csv(&buf[..]).unwrap(), c);
        assert_eq!(RdCurve::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn csv_errors_carry_line() {
        let bad = "rate_kbps,quality,metric\n100,30,PSNR\nabc,31,PSNR\n";
        match read_rd_points(bad.as_bytes()) {
            Err(MetricsError::CsvRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
