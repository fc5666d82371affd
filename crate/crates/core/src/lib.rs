//! Inference and evaluation harness for referring video object segmentation.
//!
//! The harness runs a two-stage pipeline: a predictor produces initial masks on
//! a sampled subset of frames, then a propagator fills every remaining frame.
//! A legacy streaming mode is kept alongside for ablations. Scores follow the
//! J (region IoU) / F (boundary F-measure) / J&F convention of video object
//! segmentation benchmarks.

pub mod backends;
pub mod dataio;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod sampling;
pub mod types;

pub use types::{BinaryMask, ExpressionTask, FrameRef, LabelGrid, MaskTrack, RgbFrame, Seed, VideoSequence};
