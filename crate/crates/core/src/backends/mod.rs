//! Predictor and propagator backends.
//!
//! [`toy`] holds deterministic stand-ins that run at desk scale; [`external`]
//! drives a worker process over the line-delimited JSON protocol defined in
//! [`protocol`].

pub mod external;
pub mod protocol;
pub mod stub;
pub mod toy;

use std::io;
use std::time::Duration;

use thiserror::Error;

use crate::pipeline::{PromptSet, PropagationSegment};
use crate::types::{BinaryMask, FrameError, MaskTrack, ShapeError, VideoSequence};

pub use external::WorkerEndpoint;
pub use toy::{MemoryBank, ToyNoiseConfig, ToyPredictor, ToyPropagator, ToyPropagatorParams};

/// Initial-mask request: one mask wanted for each of `indices`.
#[derive(Debug, Clone, Copy)]
pub struct PredictorRequest<'a> {
    pub video: &'a VideoSequence,
    pub expression_id: &'a str,
    pub expression: &'a str,
    pub indices: &'a [usize],
}

/// Fill the targets of one segment given the prompt masks.
#[derive(Debug, Clone, Copy)]
pub struct PropagateRequest<'a> {
    pub video: &'a VideoSequence,
    pub prompts: &'a PromptSet,
    pub segment: &'a PropagationSegment,
}

pub trait PredictorBackend: Send + Sync {
    /// Returns a partial track with exactly one mask per requested index.
    fn predict(&self, req: &PredictorRequest<'_>) -> Result<MaskTrack, BackendError>;
}

pub trait PropagatorBackend: Send + Sync {
    /// Returns one mask per target frame, in the segment's order.
    fn propagate(&self, req: &PropagateRequest<'_>) -> Result<Vec<(usize, BinaryMask)>, BackendError>;
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("worker did not answer within {0:?}")]
    Timeout(Duration),
    #[error("mask for frame {frame} is {actual:?}, expected {expected:?}")]
    Dimensions {
        frame: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("worker exited unexpectedly ({0})")]
    WorkerCrashed(String),
    #[error("cannot start worker '{command}': {source}")]
    Spawn {
        command: String,
        #[source]
        source: io::Error,
    },
    #[error("worker i/o failed: {0}")]
    Io(#[from] io::Error),
    #[error("worker reported an error: {0}")]
    Remote(String),
    #[error("frame {0} has no file path; external workers need on-disk frames")]
    InMemoryFrame(usize),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("no annotation for {0}")]
    MissingOracle(String),
    #[error("memory bank is empty")]
    EmptyMemoryBank,
}
