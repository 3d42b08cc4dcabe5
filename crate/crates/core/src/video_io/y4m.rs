//! YUV4MPEG2 reading and writing.
//!
//! Parsing keeps every header token and per-frame parameter string verbatim so
//! that `write_y4m(parse_y4m(b)) == b` for any stream we accept. Only 8-bit
//! 4:2:0, 4:2:2 and 4:4:4 colorspaces are accepted.

use std::io::{Read, Write};
use std::path::Path;

use super::frame::{ChromaSampling, Clip, FrameRate, Plane, VideoFrame};
use super::Y4mError;

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_MARKER: &[u8] = b"FRAME";
const MAX_HEADER_LEN: usize = 4096;

fn sampling_from_tag(tag: &str) -> Result<ChromaSampling, Y4mError> {
    match tag {
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(ChromaSampling::Cs420),
        "422" => Ok(ChromaSampling::Cs422),
        "444" => Ok(ChromaSampling::Cs444),
        other => Err(Y4mError::UnsupportedColorspace(other.to_string())),
    }
}

fn canonical_tag(sampling: ChromaSampling) -> &'static str {
    match sampling {
        ChromaSampling::Cs420 => "420jpeg",
        ChromaSampling::Cs422 => "422",
        ChromaSampling::Cs444 => "444",
    }
}

fn find_newline(bytes: &[u8], from: usize, limit: usize) -> Option<usize> {
    let end = bytes.len().min(from.saturating_add(limit));
    bytes[from..end].iter().position(|&b| b == b'\n').map(|p| from + p)
}

fn parse_dim(token: &str) -> Result<usize, Y4mError> {
    token[1..]
        .parse::<usize>()
        .ok()
        .filter(|&v| v > 0)
        .ok_or_else(|| Y4mError::BadHeader(format!("invalid dimension token `{token}`")))
}

fn parse_rate(token: &str) -> Result<FrameRate, Y4mError> {
    let body = &token[1..];
    let (n, d) = body
        .split_once(':')
        .ok_or_else(|| Y4mError::BadHeader(format!("invalid frame rate `{token}`")))?;
    let num = n.parse::<u32>().ok();
    let den = d.parse::<u32>().ok();
    match (num, den) {
        (Some(num), Some(den)) if num > 0 && den > 0 => Ok(FrameRate { num, den }),
        _ => Err(Y4mError::BadHeader(format!("invalid frame rate `{token}`"))),
    }
}

/// Decode a complete YUV4MPEG2 stream held in memory.
pub fn parse_y4m(bytes: &[u8]) -> Result<Clip, Y4mError> {
    if !bytes.starts_with(SIGNATURE) {
        return Err(Y4mError::MissingSignature);
    }
    let header_end = find_newline(bytes, 0, MAX_HEADER_LEN)
        .ok_or_else(|| Y4mError::BadHeader("header line not terminated".into()))?;
    let header =
        std::str::from_utf8(&bytes[..header_end]).map_err(|_| Y4mError::BadHeader("header is not ASCII".into()))?;
    let rest = &header[SIGNATURE.len()..];
    let params: Vec<String> = match rest.strip_prefix(' ') {
        Some(r) => r.split(' ').map(str::to_string).collect(),
        None if rest.is_empty() => Vec::new(),
        None => return Err(Y4mError::MissingSignature),
    };

    let (mut width, mut height, mut rate) = (None, None, None);
    let mut sampling = ChromaSampling::Cs420;
    for p in &params {
        match p.as_bytes().first() {
            Some(b'W') => width = Some(parse_dim(p)?),
            Some(b'H') => height = Some(parse_dim(p)?),
            Some(b'F') => rate = Some(parse_rate(p)?),
            Some(b'C') => sampling = sampling_from_tag(&p[1..])?,
            _ => {}
        }
    }
    let width = width.ok_or_else(|| Y4mError::BadHeader("missing W".into()))?;
    let height = height.ok_or_else(|| Y4mError::BadHeader("missing H".into()))?;
    let rate = rate.ok_or_else(|| Y4mError::BadHeader("missing F".into()))?;

    let (cw, ch) = sampling.chroma_dims(width, height);
    let luma_len = width * height;
    let chroma_len = cw * ch;
    let payload = luma_len + 2 * chroma_len;

    let mut frames = Vec::new();
    let mut frame_params = Vec::new();
    let mut pos = header_end + 1;
    while pos < bytes.len() {
        let index = frames.len();
        if !bytes[pos..].starts_with(FRAME_MARKER) {
            return Err(Y4mError::BadFrameHeader { frame: index });
        }
        let line_end = find_newline(bytes, pos, MAX_HEADER_LEN).ok_or(Y4mError::BadFrameHeader { frame: index })?;
        let raw = std::str::from_utf8(&bytes[pos + FRAME_MARKER.len()..line_end])
            .map_err(|_| Y4mError::BadFrameHeader { frame: index })?;
        if !(raw.is_empty() || raw.starts_with(' ')) {
            return Err(Y4mError::BadFrameHeader { frame: index });
        }
        let data_start = line_end + 1;
        let data_end = data_start + payload;
        if data_end > bytes.len() {
            return Err(Y4mError::Truncated {
                frame: index,
                expected: payload,
                found: bytes.len() - data_start,
            });
        }
        let data = &bytes[data_start..data_end];
        let y = Plane::new(width, height, data[..luma_len].to_vec());
        let u = Plane::new(cw, ch, data[luma_len..luma_len + chroma_len].to_vec());
        let v = Plane::new(cw, ch, data[luma_len + chroma_len..].to_vec());
        frames.push(VideoFrame {
            sampling,
            planes: [y, u, v],
        });
        frame_params.push(raw.to_string());
        pos = data_end;
    }
    if frames.is_empty() {
        return Err(Y4mError::NoFrames);
    }

    let mut clip = Clip::new(frames, rate, String::new())?;
    clip.header_params = params;
    clip.frame_params = frame_params;
    Ok(clip)
}

fn header_tokens(clip: &Clip) -> Vec<String> {
    let sampling = clip.sampling();
    let (w, h, r) = (clip.width(), clip.height(), clip.frame_rate);
    if clip.header_params.is_empty() {
        return vec![
            format!("W{w}"),
            format!("H{h}"),
            format!("F{}:{}", r.num, r.den),
            format!("C{}", canonical_tag(sampling)),
        ];
    }
    let mut saw_colorspace = false;
    let mut out: Vec<String> = clip
        .header_params
        .iter()
        .map(|p| match p.as_bytes().first() {
            Some(b'W') => format!("W{w}"),
            Some(b'H') => format!("H{h}"),
            Some(b'F') => format!("F{}:{}", r.num, r.den),
            Some(b'C') => {
                saw_colorspace = true;
                match sampling_from_tag(&p[1..]) {
                    Ok(s) if s == sampling => p.clone(),
                    _ => format!("C{}", canonical_tag(sampling)),
                }
            }
            _ => p.clone(),
        })
        .collect();
    if !saw_colorspace && sampling != ChromaSampling::Cs420 {
        out.push(format!("C{}", canonical_tag(sampling)));
    }
    out
}

/// Encode a clip as a YUV4MPEG2 byte stream.
pub fn write_y4m(clip: &Clip) -> Vec<u8> {
    let frame_bytes = clip.sampling().frame_bytes(clip.width(), clip.height());
    let mut out = Vec::with_capacity(64 + clip.len() * (frame_bytes + 6));
    out.extend_from_slice(SIGNATURE);
    for t in header_tokens(clip) {
        out.push(b' ');
        out.extend_from_slice(t.as_bytes());
    }
    out.push(b'\n');
    for (i, frame) in clip.frames().iter().enumerate() {
        out.extend_from_slice(FRAME_MARKER);
        if let Some(p) = clip.frame_params.get(i) {
            out.extend_from_slice(p.as_bytes());
        }
        out.push(b'\n');
        for plane in &frame.planes {
            out.extend_from_slice(&plane.data);
        }
    }
    out
}

pub fn read_y4m<R: Read>(mut reader: R) -> Result<Clip, Y4mError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    parse_y4m(&buf)
}

pub fn write_y4m_to<W: Write>(clip: &Clip, mut writer: W) -> Result<(), Y4mError> {
    writer.write_all(&write_y4m(clip))?;
    writer.flush()?;
    Ok(())
}

/// Read a Y4M file; the clip's `source_id` becomes the file stem.
pub fn read_y4m_file(path: &Path) -> Result<Clip, Y4mError> {
    let bytes = std::fs::read(path)?;
    let mut clip = parse_y4m(&bytes)?;
    clip.source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(clip)
}

pub fn write_y4m_file(clip: &Clip, path: &Path) -> Result<(), Y4mError> {
    std::fs::write(path, write_y4m(clip))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::synth;

    #[test]
    fn parses_constant_frame() {
        let mut bytes = b"YUV4MPEG2 W4 H4 F30:1 C420\nFRAME\n".to_vec();
        bytes.extend(std::iter::repeat_n(0x80u8, 16 + 4 + 4));
        let clip = parse_y4m(&bytes).unwrap();
        assert_eq!((clip.width(), clip.height(), clip.len()), (4, 4, 1));
        assert_eq!(clip.frame_rate, FrameRate { num: 30, den: 1 });
        assert!(clip.frames()[0].planes.iter().all(|p| p.data.iter().all(|&s| s == 128)));
        assert_eq!(write_y4m(&clip), bytes);
    }

    #[test]
    fn generated_header_length() {
        let clip = synth::constant_clip(16, 8, 1, 25, 90);
        let bytes = write_y4m(&clip);
        let header = b"YUV4MPEG2 W16 H8 F25:1 C420jpeg\nFRAME\n".len();
        assert_eq!(bytes.len(), header + 16 * 8 * 6 / 4);
        assert_eq!(bytes, write_y4m(&clip));
    }

    #[test]
    fn keeps_extra_tokens_and_frame_params() {
        let mut bytes = b"YUV4MPEG2 W2 H2 F24000:1001 Ip A1:1 C444 XYSCSS=444\n".to_vec();
        bytes.extend_from_slice(b"FRAME Ixyz\n");
        bytes.extend([1u8; 12]);
        bytes.extend_from_slice(b"FRAME\n");
        bytes.extend([2u8; 12]);
        let clip = parse_y4m(&bytes).unwrap();
        assert_eq!(clip.sampling(), ChromaSampling::Cs444);
        assert_eq!(clip.len(), 2);
        assert_eq!(write_y4m(&clip), bytes);
    }

    #[test]
    fn default_colorspace_is_420() {
        let mut bytes = b"YUV4MPEG2 W2 H2 F30:1\nFRAME\n".to_vec();
        bytes.extend([7u8; 6]);
        let clip = parse_y4m(&bytes).unwrap();
        assert_eq!(clip.sampling(), ChromaSampling::Cs420);
        assert_eq!(write_y4m(&clip), bytes);
    }

    #[test]
    fn rejects_bad_streams() {
        assert!(matches!(
            parse_y4m(b"RIFF....").unwrap_err(),
            Y4mError::MissingSignature
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W4 H4 F30:1 Cmono\nFRAME\n").unwrap_err(),
            Y4mError::UnsupportedColorspace(t) if t == "mono"
        ));
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W4 H4 F30:1 C420p10\nFRAME\n").unwrap_err(),
            Y4mError::UnsupportedColorspace(_)
        ));
        let mut two = b"YUV4MPEG2 W2 H2 F30:1 C420\nFRAME\n".to_vec();
        two.extend([0u8; 6]);
        two.extend_from_slice(b"FRAME\n");
        two.extend([0u8; 3]);
        match parse_y4m(&two).unwrap_err() {
            Y4mError::Truncated { frame, expected, found } => assert_eq!((frame, expected, found), (1, 6, 3)),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_y4m(b"YUV4MPEG2 W2 H2 F30:1\n").unwrap_err(),
            Y4mError::NoFrames
        ));
    }
}
