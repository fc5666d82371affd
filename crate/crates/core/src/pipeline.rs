//! Orchestration of the two inference modes over pluggable backends.
//!
//! *Consistent* mode asks the predictor for independent per-frame masks on the
//! sampled frames, pins those masks as prompts and lets the propagator fill the
//! gaps between them. *Legacy* mode streams from the first predicted mask
//! only, the way memory-bank trackers are initialised from a single frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, PredictorBackend, PredictorRequest, PropagateRequest, PropagatorBackend};
use crate::sampling::{self, SamplingError, SamplingPlan, SamplingStrategy};
use crate::types::{BinaryMask, ExpressionTask, MaskTrack, Seed, ShapeError, VideoSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Legacy,
    Consistent,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Legacy => "legacy",
            Mode::Consistent => "consistent",
        }
    }

    /// Sampling used when none is given: legacy inference took the first
    /// frames, consistent inference samples uniformly.
    pub fn default_sampling(self) -> SamplingStrategy {
        match self {
            Mode::Legacy => SamplingStrategy::FirstT,
            Mode::Consistent => SamplingStrategy::Uniform,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "legacy" => Ok(Mode::Legacy),
            "consistent" => Ok(Mode::Consistent),
            other => Err(format!("unknown mode '{other}' (expected legacy or consistent)")),
        }
    }
}

/// Which of the initial masks are handed to the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptPolicy {
    All,
    FirstK(usize),
}

impl fmt::Display for PromptPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptPolicy::All => f.write_str("all"),
            PromptPolicy::FirstK(k) => write!(f, "first:{k}"),
        }
    }
}

impl FromStr for PromptPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if lower == "all" {
            return Ok(PromptPolicy::All);
        }
        let k = lower
            .strip_prefix("first:")
            .or_else(|| lower.strip_prefix("first-k:"))
            .ok_or_else(|| format!("unknown prompt policy '{s}' (expected all or first:K)"))?;
        k.parse::<usize>()
            .map(PromptPolicy::FirstK)
            .map_err(|_| format!("invalid prompt count in '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub sampling: SamplingStrategy,
    pub frames: usize,
    pub prompt_policy: PromptPolicy,
    /// `None` selects the diagonal-based default per video.
    pub boundary_tolerance: Option<f64>,
    pub seed: Seed,
}

impl PipelineConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            sampling: mode.default_sampling(),
            frames: 5,
            prompt_policy: PromptPolicy::All,
            boundary_tolerance: None,
            seed: Seed(0),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.frames == 0 {
            return Err(PipelineError::Config("frame count must be at least 1".into()));
        }
        if let PromptPolicy::FirstK(k) = self.prompt_policy {
            if k == 0 || k > self.frames {
                return Err(PipelineError::Config(format!(
                    "prompt policy first:{k} needs 1 <= k <= {}",
                    self.frames
                )));
            }
        }
        if let Some(t) = self.boundary_tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(PipelineError::Config(format!("invalid boundary tolerance {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("pipeline called in {got} mode but configured for {configured}")]
    ModeMismatch { configured: Mode, got: Mode },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("{stage} backend failed for {video}/{expression}: {source}")]
    Backend {
        stage: &'static str,
        video: String,
        expression: String,
        #[source]
        source: Box<BackendError>,
    },
    #[error("predictor returned frames {got:?}, expected {expected:?}")]
    PredictorFrames { expected: Vec<usize>, got: Vec<usize> },
    #[error("propagator returned frames {got:?}, expected {expected:?}")]
    PropagatorFrames { expected: Vec<usize>, got: Vec<usize> },
    #[error("{stage} returned a {actual:?} mask for a {expected:?} video")]
    MaskDimensions {
        stage: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("no initial masks to prompt with")]
    NoPrompts,
    #[error("prompt policy asks for {requested} prompts but only {available} initial masks exist")]
    NotEnoughPrompts { requested: usize, available: usize },
    #[error("prompt frames must be sorted, unique and below {frame_count}: {frames:?}")]
    BadPromptFrames { frames: Vec<usize>, frame_count: usize },
}

/// Masks handed to the propagator, in increasing frame order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    entries: Vec<(usize, BinaryMask)>,
}

impl PromptSet {
    pub fn new(entries: Vec<(usize, BinaryMask)>) -> Result<Self, PipelineError> {
        if entries.is_empty() {
            return Err(PipelineError::NoPrompts);
        }
        let frames: Vec<usize> = entries.iter().map(|(f, _)| *f).collect();
        if !frames.windows(2).all(|w| w[0] < w[1]) {
            return Err(PipelineError::BadPromptFrames {
                frames,
                frame_count: usize::MAX,
            });
        }
        let dims = entries[0].1.dims();
        for (_, m) in &entries {
            if m.dims() != dims {
                return Err(ShapeError::DimensionMismatch {
                    expected: dims,
                    actual: m.dims(),
                }
                .into());
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, BinaryMask)] {
        &self.entries
    }

    pub fn frames(&self) -> Vec<usize> {
        self.entries.iter().map(|(f, _)| *f).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn wire_name(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

/// Contiguous run of frames filled from one prompt, in processing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationSegment {
    pub prompt_frame: usize,
    pub direction: Direction,
    pub target_frames: Vec<usize>,
}

pub fn select_prompts(initial: &MaskTrack, policy: PromptPolicy) -> Result<PromptSet, PipelineError> {
    if initial.is_empty() {
        return Err(PipelineError::NoPrompts);
    }
    let take = match policy {
        PromptPolicy::All => initial.len(),
        PromptPolicy::FirstK(k) => {
            if k > initial.len() {
                return Err(PipelineError::NotEnoughPrompts {
                    requested: k,
                    available: initial.len(),
                });
            }
            k
        }
    };
    PromptSet::new(initial.iter().take(take).map(|(f, m)| (f, m.clone())).collect())
}

/// Splits the non-prompt frames of a video into propagation segments.
///
/// Frames before the earliest prompt are filled backward from it; every other
/// gap is filled forward from the prompt on its left. Segments with no
/// targets are omitted.
pub fn partition_propagation(
    prompt_frames: &[usize],
    frame_count: usize,
) -> Result<Vec<PropagationSegment>, PipelineError> {
    let Some(&first) = prompt_frames.first() else {
        return Err(PipelineError::NoPrompts);
    };
    let sorted = prompt_frames.windows(2).all(|w| w[0] < w[1]);
    if !sorted || prompt_frames.iter().any(|&p| p >= frame_count) {
        return Err(PipelineError::BadPromptFrames {
            frames: prompt_frames.to_vec(),
            frame_count,
        });
    }
    let mut segments = Vec::new();
    if first > 0 {
        segments.push(PropagationSegment {
            prompt_frame: first,
            direction: Direction::Backward,
            target_frames: (0..first).rev().collect(),
        });
    }
    for (i, &p) in prompt_frames.iter().enumerate() {
        let end = prompt_frames.get(i + 1).copied().unwrap_or(frame_count);
        if p + 1 < end {
            segments.push(PropagationSegment {
                prompt_frame: p,
                direction: Direction::Forward,
                target_frames: (p + 1..end).collect(),
            });
        }
    }
    Ok(segments)
}

/// A finished pipeline run for one expression.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub track: MaskTrack,
    pub plan: SamplingPlan,
    pub prompt_frames: Vec<usize>,
}

/// Runs the pipeline in the mode given by `cfg`.
pub fn run(
    video: &VideoSequence,
    task: &ExpressionTask,
    cfg: &PipelineConfig,
    predictor: &dyn PredictorBackend,
    propagator: &dyn PropagatorBackend,
) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    let frame_count = video.frame_count();
    let sampling_seed = cfg.seed.derive(&[video.id(), &task.expression_id, "sampling"]);
    let plan = sampling::plan(cfg.sampling, frame_count, cfg.frames, sampling_seed)?;
    let initial = predict(video, task, &plan, predictor)?;

    let prompts = match cfg.mode {
        Mode::Consistent => select_prompts(&initial, cfg.prompt_policy)?,
        Mode::Legacy => select_prompts(&initial, PromptPolicy::FirstK(1))?,
    };
    let prompt_frames = prompts.frames();

    let mut track = MaskTrack::new(video.id());
    for (frame, mask) in prompts.entries() {
        track.insert(*frame, mask.clone())?;
    }
    for segment in partition_propagation(&prompt_frames, frame_count)? {
        let req = PropagateRequest {
            video,
            prompts: &prompts,
            segment: &segment,
        };
        let masks = propagator.propagate(&req).map_err(|source| PipelineError::Backend {
            stage: "propagate",
            video: video.id().to_string(),
            expression: task.expression_id.clone(),
            source: Box::new(source),
        })?;
        let got: Vec<usize> = masks.iter().map(|(f, _)| *f).collect();
        if got != segment.target_frames {
            return Err(PipelineError::PropagatorFrames {
                expected: segment.target_frames.clone(),
                got,
            });
        }
        for (frame, mask) in masks {
            check_dims("propagate", video, &mask)?;
            track.insert(frame, mask)?;
        }
    }
    debug_assert!(track.is_full(frame_count));
    Ok(PipelineOutput {
        track,
        plan,
        prompt_frames,
    })
}

fn check_dims(stage: &'static str, video: &VideoSequence, mask: &BinaryMask) -> Result<(), PipelineError> {
    if mask.dims() != video.dims() {
        return Err(PipelineError::MaskDimensions {
            stage,
            expected: video.dims(),
            actual: mask.dims(),
        });
    }
    Ok(())
}

fn predict(
    video: &VideoSequence,
    task: &ExpressionTask,
    plan: &SamplingPlan,
    predictor: &dyn PredictorBackend,
) -> Result<MaskTrack, PipelineError> {
    let req = PredictorRequest {
        video,
        expression_id: &task.expression_id,
        expression: &task.text,
        indices: &plan.indices,
    };
    let initial = predictor.predict(&req).map_err(|source| PipelineError::Backend {
        stage: "predict",
        video: video.id().to_string(),
        expression: task.expression_id.clone(),
        source: Box::new(source),
    })?;
    let got: Vec<usize> = initial.frames().collect();
    if got != plan.indices {
        return Err(PipelineError::PredictorFrames {
            expected: plan.indices.clone(),
            got,
        });
    }
    for (_, m) in initial.iter() {
        check_dims("predict", video, m)?;
    }
    Ok(initial)
}

fn ensure_mode(cfg: &PipelineConfig, mode: Mode) -> Result<(), PipelineError> {
    if cfg.mode != mode {
        return Err(PipelineError::ModeMismatch {
            configured: cfg.mode,
            got: mode,
        });
    }
    Ok(())
}

/// Two-stage inference: independent initial masks on sampled frames, pinned
/// as prompts, then propagation over every other frame.
pub fn run_consistent(
    video: &VideoSequence,
    task: &ExpressionTask,
    cfg: &PipelineConfig,
    predictor: &dyn PredictorBackend,
    propagator: &dyn PropagatorBackend,
) -> Result<MaskTrack, PipelineError> {
    ensure_mode(cfg, Mode::Consistent)?;
    run(video, task, cfg, predictor, propagator).map(|o| o.track)
}

/// Streaming inference initialised from the first predicted mask only; the
/// other sampled frames are propagated over like any unsampled frame.
pub fn run_legacy(
    video: &VideoSequence,
    task: &ExpressionTask,
    cfg: &PipelineConfig,
    predictor: &dyn PredictorBackend,
    propagator: &dyn PropagatorBackend,
) -> Result<MaskTrack, PipelineError> {
    ensure_mode(cfg, Mode::Legacy)?;
    run(video, task, cfg, predictor, propagator).map(|o| o.track)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(p: usize, d: Direction, t: &[usize]) -> PropagationSegment {
        PropagationSegment {
            prompt_frame: p,
            direction: d,
            target_frames: t.to_vec(),
        }
    }

    #[test]
    fn partition_examples() {
        use Direction::*;
        assert_eq!(
            partition_propagation(&[0, 4, 8], 10).unwrap(),
            vec![
                seg(0, Forward, &[1, 2, 3]),
                seg(4, Forward, &[5, 6, 7]),
                seg(8, Forward, &[9])
            ]
        );
        assert_eq!(
            partition_propagation(&[3], 6).unwrap(),
            vec![seg(3, Backward, &[2, 1, 0]), seg(3, Forward, &[4, 5])]
        );
        assert!(partition_propagation(&[0], 1).unwrap().is_empty());
        assert!(matches!(partition_propagation(&[], 3), Err(PipelineError::NoPrompts)));
        assert!(partition_propagation(&[2, 1], 3).is_err());
        assert!(partition_propagation(&[3], 3).is_err());
    }

    fn initial_at(frames: &[usize]) -> MaskTrack {
        MaskTrack::from_entries("v", frames.iter().map(|&f| (f, BinaryMask::empty(2, 2).unwrap()))).unwrap()
    }

    #[test]
    fn prompt_selection_examples() {
        let t = initial_at(&[0, 3, 6]);
        assert_eq!(select_prompts(&t, PromptPolicy::All).unwrap().frames(), vec![0, 3, 6]);
        assert_eq!(select_prompts(&t, PromptPolicy::FirstK(1)).unwrap().frames(), vec![0]);
        let t2 = initial_at(&[2, 5]);
        assert_eq!(
            select_prompts(&t2, PromptPolicy::FirstK(2)).unwrap().frames(),
            vec![2, 5]
        );
        assert!(matches!(
            select_prompts(&t2, PromptPolicy::FirstK(3)),
            Err(PipelineError::NotEnoughPrompts {
                requested: 3,
                available: 2
            })
        ));
        assert!(select_prompts(&MaskTrack::new("v"), PromptPolicy::All).is_err());
    }

    #[test]
    fn policy_and_mode_parsing() {
        assert_eq!("all".parse::<PromptPolicy>().unwrap(), PromptPolicy::All);
        assert_eq!("first:3".parse::<PromptPolicy>().unwrap(), PromptPolicy::FirstK(3));
        assert!("first:x".parse::<PromptPolicy>().is_err());
        for p in [PromptPolicy::All, PromptPolicy::FirstK(12)] {
            assert_eq!(p.to_string().parse::<PromptPolicy>().unwrap(), p);
        }
        assert_eq!("Legacy".parse::<Mode>().unwrap(), Mode::Legacy);
        assert!("streaming".parse::<Mode>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = PipelineConfig::new(Mode::Consistent);
        assert!(cfg.validate().is_ok());
        cfg.prompt_policy = PromptPolicy::FirstK(6);
        assert!(cfg.validate().is_err());
        cfg.prompt_policy = PromptPolicy::FirstK(0);
        assert!(cfg.validate().is_err());
        cfg.prompt_policy = PromptPolicy::FirstK(5);
        cfg.boundary_tolerance = Some(-2.0);
        assert!(cfg.validate().is_err());
    }
}
