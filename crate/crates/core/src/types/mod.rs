//! Shared domain types: masks, tracks, videos, expressions and seeds.

mod mask;
mod seed;
mod track;
mod video;

pub use mask::{mask_area, mask_equal, BinaryMask, LabelGrid};
pub use seed::Seed;
pub use track::{ExpressionTask, MaskTrack};
pub use video::{FrameError, FrameRef, RgbFrame, VideoSequence};

use thiserror::Error;

/// Construction-time violations of the shape invariants of the core types.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("mask dimensions must be at least 1x1, got {height}x{width}")]
    EmptyDimensions { height: usize, width: usize },
    #[error("expected {expected} pixels for a {height}x{width} grid, got {actual}")]
    LengthMismatch {
        height: usize,
        width: usize,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("video {video} has no frames")]
    NoFrames { video: String },
    #[error("ground truth for {expression} has {actual} masks, video has {expected} frames")]
    GroundTruthLength {
        expression: String,
        expected: usize,
        actual: usize,
    },
    #[error("expression {expression} has ground truth but no object ids")]
    MissingObjectIds { expression: String },
}
