use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::CodecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameType {
    I,
    P,
    B,
    KF,
    GF,
    ARF,
}

impl FrameType {
    /// Intra-coded or key frame.
    pub fn is_key(self) -> bool {
        matches!(self, FrameType::I | FrameType::KF)
    }
}

/// One row of the normalized per-frame statistics schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub frame_index: usize,
    pub frame_type: FrameType,
    pub bits: f64,
    pub avg_qp: f64,
    pub q_y: f64,
    pub q_u: f64,
    pub q_v: f64,
}

pub fn parse_frame_stats<R: Read>(r: R) -> Result<Vec<FrameStats>, CodecError> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize::<FrameStats>() {
        let row = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CodecError::Decode(format!("stats line {line}: {e}"))
        })?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_frame_stats<W: Write>(w: W, stats: &[FrameStats]) -> Result<(), CodecError> {
    let mut wr = csv::Writer::from_writer(w);
    for s in stats {
        wr.serialize(s).map_err(|e| CodecError::Decode(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_unknown_type() {
        let rows = vec![
            FrameStats {
                frame_index: 0,
                frame_type: FrameType::KF,
                bits: 12000.0,
                avg_qp: 27.0,
                q_y: 0.98,
                q_u: 0.99,
                q_v: 0.99,
            },
            FrameStats {
                frame_index: 1,
                frame_type: FrameType::ARF,
                bits: 3000.0,
                avg_qp: 30.5,
                q_y: 0.97,
                q_u: 0.98,
                q_v: 0.985,
            },
        ];
        let mut buf = Vec::new();
        write_frame_stats(&mut buf, &rows).unwrap();
        assert!(buf.starts_with(b"frame_index,frame_type,bits,avg_qp,q_y,q_u,q_v\n"));
        assert_eq!(parse_frame_stats(&buf[..]).unwrap(), rows);
        let bad = "frame_index,frame_type,bits,avg_qp,q_y,q_u,q_v\n0,X,1,1,1,1,1\n";
        assert!(parse_frame_stats(bad.as_bytes()).is_err());
    }
}
