//! Frame sampling: which `T` of the `I` frames are shown to the predictor.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingStrategy {
    /// The first `T` frames.
    FirstT,
    /// Evenly spaced, both endpoints included.
    Uniform,
    /// Stride `floor(I/T)` from a seeded random start offset.
    UniformOffset,
    /// `T` distinct frames drawn without replacement.
    Random,
}

impl SamplingStrategy {
    pub const ALL: [SamplingStrategy; 4] = [
        SamplingStrategy::FirstT,
        SamplingStrategy::Uniform,
        SamplingStrategy::UniformOffset,
        SamplingStrategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplingStrategy::FirstT => "first",
            SamplingStrategy::Uniform => "uniform",
            SamplingStrategy::UniformOffset => "uniform-offset",
            SamplingStrategy::Random => "random",
        }
    }
}

impl fmt::Display for SamplingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "first" | "first-t" | "firstt" => Ok(SamplingStrategy::FirstT),
            "uniform" => Ok(SamplingStrategy::Uniform),
            "uniform-offset" | "uniformoffset" => Ok(SamplingStrategy::UniformOffset),
            "random" => Ok(SamplingStrategy::Random),
            other => Err(format!(
                "unknown sampling strategy '{other}' (expected first, uniform, uniform-offset or random)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("video has no frames")]
    NoFrames,
    #[error("requested frame count must be at least 1")]
    ZeroRequested,
    #[error("uniform-offset sampling needs T <= I, got T={requested} I={total}")]
    TooManyForOffset { total: usize, requested: usize },
}

/// The frames selected for the predictor and how they were chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub strategy: SamplingStrategy,
    pub total_frames: usize,
    pub requested: usize,
    pub indices: Vec<usize>,
    pub seed: Option<Seed>,
}

fn check(total: usize, requested: usize) -> Result<(), SamplingError> {
    if total == 0 {
        return Err(SamplingError::NoFrames);
    }
    if requested == 0 {
        return Err(SamplingError::ZeroRequested);
    }
    Ok(())
}

pub fn plan_first(total: usize, requested: usize) -> Result<SamplingPlan, SamplingError> {
    check(total, requested)?;
    Ok(SamplingPlan {
        strategy: SamplingStrategy::FirstT,
        total_frames: total,
        requested,
        indices: (0..requested.min(total)).collect(),
        seed: None,
    })
}

/// `indices_k = floor(k (I-1) / (T-1))`, which always includes frames `0`
/// and `I-1` when `2 <= T <= I`.
pub fn plan_uniform(total: usize, requested: usize) -> Result<SamplingPlan, SamplingError> {
    check(total, requested)?;
    let indices = if requested >= total {
        (0..total).collect()
    } else if requested == 1 {
        vec![0]
    } else {
        (0..requested).map(|k| k * (total - 1) / (requested - 1)).collect()
    };
    Ok(SamplingPlan {
        strategy: SamplingStrategy::Uniform,
        total_frames: total,
        requested,
        indices,
        seed: None,
    })
}

/// The start offset used by [`plan_uniform_offset`]: uniform in `[0, floor(I/T))`.
pub fn uniform_offset(total: usize, requested: usize, seed: Seed) -> usize {
    let stride = total / requested;
    if stride <= 1 {
        0
    } else {
        seed.rng().random_range(0..stride)
    }
}

pub fn plan_uniform_offset(total: usize, requested: usize, seed: Seed) -> Result<SamplingPlan, SamplingError> {
    check(total, requested)?;
    if requested > total {
        return Err(SamplingError::TooManyForOffset { total, requested });
    }
    let stride = total / requested;
    let offset = uniform_offset(total, requested, seed);
    Ok(SamplingPlan {
        strategy: SamplingStrategy::UniformOffset,
        total_frames: total,
        requested,
        indices: (0..requested).map(|k| offset + k * stride).collect(),
        seed: Some(seed),
    })
}

pub fn plan_random(total: usize, requested: usize, seed: Seed) -> Result<SamplingPlan, SamplingError> {
    check(total, requested)?;
    let mut rng = seed.rng();
    let mut indices = rand::seq::index::sample(&mut rng, total, requested.min(total)).into_vec();
    indices.sort_unstable();
    Ok(SamplingPlan {
        strategy: SamplingStrategy::Random,
        total_frames: total,
        requested,
        indices,
        seed: Some(seed),
    })
}

/// Dispatches on `strategy`. Unlike [`plan_uniform_offset`], a request for more
/// frames than the video has is clamped to `I` for every strategy.
pub fn plan(
    strategy: SamplingStrategy,
    total: usize,
    requested: usize,
    seed: Seed,
) -> Result<SamplingPlan, SamplingError> {
    match strategy {
        SamplingStrategy::FirstT => plan_first(total, requested),
        SamplingStrategy::Uniform => plan_uniform(total, requested),
        SamplingStrategy::UniformOffset => {
            check(total, requested)?;
            let mut p = plan_uniform_offset(total, requested.min(total), seed)?;
            p.requested = requested;
            Ok(p)
        }
        SamplingStrategy::Random => plan_random(total, requested, seed),
    }
}
