use serde::{Deserialize, Serialize};
use std::fmt;

use super::VideoError;

/// Chroma layout of a planar 8-bit frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChromaSampling {
    Cs420,
    Cs422,
    Cs444,
}

impl ChromaSampling {
    /// Chroma plane dimensions for the given luma dimensions.
    pub fn chroma_dims(self, width: usize, height: usize) -> (usize, usize) {
        match self {
            ChromaSampling::Cs420 => (width.div_ceil(2), height.div_ceil(2)),
            ChromaSampling::Cs422 => (width.div_ceil(2), height),
            ChromaSampling::Cs444 => (width, height),
        }
    }

    /// Bytes in one frame payload (all three planes).
    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        let (cw, ch) = self.chroma_dims(width, height);
        width * height + 2 * cw * ch
    }
}

impl fmt::Display for ChromaSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChromaSampling::Cs420 => "4:2:0",
            ChromaSampling::Cs422 => "4:2:2",
            ChromaSampling::Cs444 => "4:4:4",
        };
        f.write_str(s)
    }
}

/// A single 8-bit sample plane stored row-major without padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "plane buffer size mismatch");
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Sample at (x, y) with coordinates clamped to the plane edges.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Planar frame: luma followed by two chroma planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoFrame {
    pub sampling: ChromaSampling,
    pub planes: [Plane; 3],
}

impl VideoFrame {
    pub fn new(sampling: ChromaSampling, planes: [Plane; 3]) -> Result<Self, VideoError> {
        let (w, h) = (planes[0].width, planes[0].height);
        if w == 0 || h == 0 {
            return Err(VideoError::Degenerate { width: w, height: h });
        }
        let (cw, ch) = sampling.chroma_dims(w, h);
        for p in &planes[1..] {
            if p.width != cw || p.height != ch {
                return Err(VideoError::PlaneGeometry {
                    expected: (cw, ch),
                    found: (p.width, p.height),
                });
            }
        }
        Ok(Self { sampling, planes })
    }

    /// A frame with every luma sample set to `luma` and chroma at `chroma`.
    pub fn filled(width: usize, height: usize, sampling: ChromaSampling, luma: u8, chroma: u8) -> Self {
        let (cw, ch) = sampling.chroma_dims(width, height);
        Self {
            sampling,
            planes: [
                Plane::filled(width, height, luma),
                Plane::filled(cw, ch, chroma),
                Plane::filled(cw, ch, chroma),
            ],
        }
    }

    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn luma(&self) -> &Plane {
        &self.planes[0]
    }
}

/// Frame rate as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self, VideoError> {
        if num == 0 || den == 0 {
            return Err(VideoError::FrameRate { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn fps(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// An ordered run of frames sharing geometry and frame rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clip {
    frames: Vec<VideoFrame>,
    pub frame_rate: FrameRate,
    pub source_id: String,
    /// Raw YUV4MPEG2 header parameters in their original order; geometry,
    /// rate and colorspace tokens are regenerated on write.
    pub header_params: Vec<String>,
    /// Raw per-frame parameters (text after `FRAME`), one per frame.
    pub frame_params: Vec<String>,
}

impl Clip {
    pub fn new(
        frames: Vec<VideoFrame>,
        frame_rate: FrameRate,
        source_id: impl Into<String>,
    ) -> Result<Self, VideoError> {
        let first = frames.first().ok_or(VideoError::EmptyClip)?;
        let (w, h, s) = (first.width(), first.height(), first.sampling);
        for (i, f) in frames.iter().enumerate() {
            if f.width() != w || f.height() != h || f.sampling != s {
                return Err(VideoError::MixedGeometry { frame: i });
            }
        }
        if frame_rate.num == 0 || frame_rate.den == 0 {
            return Err(VideoError::FrameRate {
                num: frame_rate.num,
                den: frame_rate.den,
            });
        }
        let n = frames.len();
        Ok(Self {
            frames,
            frame_rate,
            source_id: source_id.into(),
            header_params: Vec::new(),
            frame_params: vec![String::new(); n],
        })
    }

    /// Replace the frames, keeping rate, id and Y4M metadata. Geometry may
    /// change but must stay uniform.
    pub fn with_frames(&self, frames: Vec<VideoFrame>) -> Result<Self, VideoError> {
        let mut out = Clip::new(frames, self.frame_rate, self.source_id.clone())?;
        out.header_params = self.header_params.clone();
        if out.frames.len() == self.frames.len() {
            out.frame_params = self.frame_params.clone();
        }
        Ok(out)
    }

    /// Apply `f` to every frame.
    pub fn map_frames<F>(&self, f: F) -> Result<Self, VideoError>
    where
        F: FnMut(&VideoFrame) -> VideoFrame,
    {
        self.with_frames(self.frames.iter().map(f).collect())
    }

    pub fn frames(&self) -> &[VideoFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn sampling(&self) -> ChromaSampling {
        self.frames[0].sampling
    }

    pub fn duration_seconds(&self) -> f64 {
        self.frames.len() as f64 / self.frame_rate.fps()
    }

    pub fn meta(&self) -> ClipMeta {
        ClipMeta {
            source_id: self.source_id.clone(),
            width: self.width(),
            height: self.height(),
            n_frames: self.len(),
            frame_rate: self.frame_rate,
        }
    }
}

/// Geometry and timing of a clip without its samples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClipMeta {
    pub source_id: String,
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub frame_rate: FrameRate,
}

impl ClipMeta {
    pub fn duration_seconds(&self) -> f64 {
        self.n_frames as f64 / self.frame_rate.fps()
    }

    pub fn megapixel_frames(&self) -> f64 {
        (self.width * self.height * self.n_frames) as f64 / 1.0e6
    }
}
