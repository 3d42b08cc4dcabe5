use std::io::{Read, Write};

use super::complexity::ComplexityFeatures;
use super::model::TimeSample;
use super::LoadError;

fn csv_err(e: csv::Error) -> LoadError {
    LoadError::Data(format!("corpus csv: {e}"))
}

/// One row per sample: the feature columns, then `seconds` and
/// `source_id`.
pub fn write_time_samples_csv<W: Write>(w: W, samples: &[TimeSample]) -> Result<(), LoadError> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = ComplexityFeatures::NAMES.to_vec();
    header.extend(["seconds", "source_id"]);
    wr.write_record(&header).map_err(csv_err)?;
    for s in samples {
        let mut row: Vec<String> = s.features.to_vec().iter().map(|v| v.to_string()).collect();
        row.push(s.measured_seconds.to_string());
        row.push(s.source_id.clone());
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn read_rows<R: Read>(r: R, need_seconds: bool) -> Result<Vec<TimeSample>, LoadError> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let feature_cols = ComplexityFeatures::NAMES
        .iter()
        .map(|n| col(n).ok_or_else(|| LoadError::Data(format!("corpus csv: missing column `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let secs_col = col("seconds");
    if need_seconds && secs_col.is_none() {
        return Err(LoadError::Data("corpus csv: missing column `seconds`".into()));
    }
    let src_col = col("source_id");
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |c: usize| -> Result<f64, LoadError> {
            let field = rec.get(c).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                LoadError::Data(format!(
                    "corpus csv row {}: `{field}` in `{}` is not a number",
                    i + 1,
                    &header[c]
                ))
            })
        };
        let values = feature_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?;
        let features = ComplexityFeatures::from_slice(&values).expect("one value per feature");
        out.push(TimeSample {
            features,
            measured_seconds: match secs_col {
                Some(c) if need_seconds => num(c)?,
                _ => f64::NAN,
            },
            source_id: src_col
                .and_then(|c| rec.get(c))
                .map_or_else(|| format!("row-{}", i + 1), str::to_string),
        });
    }
    Ok(out)
}

/// Features without durations: the feature columns, then `source_id`.
pub fn write_features_csv<W: Write>(w: W, rows: &[(String, ComplexityFeatures)]) -> Result<(), LoadError> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = ComplexityFeatures::NAMES.to_vec();
    header.push("source_id");
    wr.write_record(&header).map_err(csv_err)?;
    for (id, f) in rows {
        let mut row: Vec<String> = f.to_vec().iter().map(|v| v.to_string()).collect();
        row.push(id.clone());
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Features of a features or corpus CSV; any `seconds` column is ignored.
pub fn read_features_csv<R: Read>(r: R) -> Result<Vec<(String, ComplexityFeatures)>, LoadError> {
    read_rows(r, false).map(|rows| rows.into_iter().map(|s| (s.source_id, s.features)).collect())
}

/// Columns may come in any order; extra columns are ignored. A missing
/// `source_id` column gives every row its own source.
pub fn read_time_samples_csv<R: Read>(r: R) -> Result<Vec<TimeSample>, LoadError> {
    read_rows(r, true)
}
