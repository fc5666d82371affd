use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use super::ShapeError;

/// An in-memory 8-bit RGB frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    height: usize,
    width: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbFrame {
    pub fn new(height: usize, width: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ShapeError> {
        if height == 0 || width == 0 {
            return Err(ShapeError::EmptyDimensions { height, width });
        }
        if pixels.len() != height * width {
            return Err(ShapeError::LengthMismatch {
                height,
                width,
                expected: height * width,
                actual: pixels.len(),
            });
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, color: [u8; 3]) -> Result<Self, ShapeError> {
        Self::new(height, width, vec![color; height * width])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, color: [u8; 3]) {
        self.pixels[row * self.width + col] = color;
    }

    pub fn load(path: &Path) -> Result<Self, FrameError> {
        let img = image::open(path)
            .map_err(|source| FrameError::Decode {
                path: path.to_path_buf(),
                source,
            })?
            .into_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let pixels = img.pixels().map(|p| p.0).collect();
        Ok(Self::new(h, w, pixels)?)
    }

    pub fn save_png(&self, path: &Path) -> Result<(), FrameError> {
        let mut buf = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            buf.extend_from_slice(p);
        }
        image::save_buffer(
            path,
            &buf,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|source| FrameError::Decode {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("cannot read image {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("frame {index} out of range for video {video} with {count} frames")]
    OutOfRange { video: String, index: usize, count: usize },
    #[error("frame {index} of video {video} is {actual:?}, video is {expected:?}")]
    Dimensions {
        video: String,
        index: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
}

/// Where the pixels of a frame live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameRef {
    Path(PathBuf),
    Pixels(Arc<RgbFrame>),
}

/// Ordered frames of one video. Frame indices are 0-based and contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    id: String,
    height: usize,
    width: usize,
    frames: Vec<FrameRef>,
}

impl VideoSequence {
    pub fn new(id: impl Into<String>, height: usize, width: usize, frames: Vec<FrameRef>) -> Result<Self, ShapeError> {
        let id = id.into();
        if height == 0 || width == 0 {
            return Err(ShapeError::EmptyDimensions { height, width });
        }
        if frames.is_empty() {
            return Err(ShapeError::NoFrames { video: id });
        }
        for f in &frames {
            if let FrameRef::Pixels(p) = f {
                if p.dims() != (height, width) {
                    return Err(ShapeError::DimensionMismatch {
                        expected: (height, width),
                        actual: p.dims(),
                    });
                }
            }
        }
        Ok(Self {
            id,
            height,
            width,
            frames,
        })
    }

    /// Builds a video from in-memory frames, taking dimensions from the first.
    pub fn from_frames(id: impl Into<String>, frames: Vec<RgbFrame>) -> Result<Self, ShapeError> {
        let id = id.into();
        let Some(first) = frames.first() else {
            return Err(ShapeError::NoFrames { video: id });
        };
        let (h, w) = first.dims();
        Self::new(
            id,
            h,
            w,
            frames.into_iter().map(|f| FrameRef::Pixels(Arc::new(f))).collect(),
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn frames(&self) -> &[FrameRef] {
        &self.frames
    }

    /// Returns the pixels of frame `index`, reading from disk if needed.
    pub fn load_frame(&self, index: usize) -> Result<Arc<RgbFrame>, FrameError> {
        let frame = self.frames.get(index).ok_or_else(|| FrameError::OutOfRange {
            video: self.id.clone(),
            index,
            count: self.frames.len(),
        })?;
        let pixels = match frame {
            FrameRef::Pixels(p) => Arc::clone(p),
            FrameRef::Path(path) => Arc::new(RgbFrame::load(path)?),
        };
        if pixels.dims() != self.dims() {
            return Err(FrameError::Dimensions {
                video: self.id.clone(),
                index,
                expected: self.dims(),
                actual: pixels.dims(),
            });
        }
        Ok(pixels)
    }

    /// Replaces every on-disk frame with its decoded pixels.
    pub fn preload(&self) -> Result<VideoSequence, FrameError> {
        let frames = (0..self.frames.len())
            .map(|i| self.load_frame(i).map(FrameRef::Pixels))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VideoSequence { frames, ..self.clone() })
    }
}
