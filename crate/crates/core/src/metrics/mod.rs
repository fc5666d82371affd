//! Region similarity J, boundary F-measure F, and their benchmark-style
//! aggregation into J&F.
//!
//! J&F is the arithmetic mean `(J + F) / 2`. Printed benchmark tables follow
//! the arithmetic convention even where the accompanying text calls it a
//! geometric mean.

mod boundary;

pub use boundary::{boundary_f, mask_boundary, squared_distance_transform};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{BinaryMask, MaskTrack, ShapeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("boundary tolerance must be a finite non-negative number, got {0}")]
    InvalidTolerance(f64),
    #[error("{track} track of {video}/{expression} has no mask for frame {frame}")]
    MissingFrame {
        video: String,
        expression: String,
        track: &'static str,
        frame: usize,
    },
    #[error("prediction for {video}/{expression} covers frames outside 0..{frames}")]
    ExtraFrames {
        video: String,
        expression: String,
        frames: usize,
    },
    #[error("ground truth for {video}/{expression} is empty")]
    EmptyTrack { video: String, expression: String },
    #[error("cannot aggregate an empty list of expression scores")]
    NoExpressions,
}

/// Intersection over union. Both empty scores 1, exactly one empty scores 0.
pub fn jaccard(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricsError> {
    let union = pred.union_area(gt)?;
    if union == 0 {
        return Ok(1.0);
    }
    let inter = pred.intersection_area(gt)?;
    Ok(inter as f64 / union as f64)
}

pub fn jf_mean(j: f64, f: f64) -> f64 {
    (j + f) / 2.0
}

/// The usual video-segmentation default: `max(1, round(0.008 * diagonal))`.
pub fn default_tolerance(height: usize, width: usize) -> f64 {
    let diag = ((height * height + width * width) as f64).sqrt();
    (0.008 * diag).round().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame: usize,
    pub j: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionScore {
    pub video_id: String,
    pub expression_id: String,
    pub mean_j: f64,
    pub mean_f: f64,
    pub jf: f64,
    pub frames: Vec<FrameScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub expression_count: usize,
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

/// Scores every frame of `gt` against `pred`. Both tracks must be full over
/// the same frames.
pub fn score_expression(
    expression_id: &str,
    pred: &MaskTrack,
    gt: &MaskTrack,
    tolerance: f64,
) -> Result<ExpressionScore, MetricsError> {
    let video = gt.video_id().to_string();
    let frames = gt.len();
    if frames == 0 {
        return Err(MetricsError::EmptyTrack {
            video,
            expression: expression_id.to_string(),
        });
    }
    let missing = |track, frame| MetricsError::MissingFrame {
        video: video.clone(),
        expression: expression_id.to_string(),
        track,
        frame,
    };
    if !gt.is_full(frames) {
        let frame = (0..frames).find(|i| gt.get(*i).is_none()).unwrap_or(frames);
        return Err(missing("ground-truth", frame));
    }
    let mut scores = Vec::with_capacity(frames);
    for (frame, g) in gt.iter() {
        let p = pred.get(frame).ok_or_else(|| missing("predicted", frame))?;
        scores.push(FrameScore {
            frame,
            j: jaccard(p, g)?,
            f: boundary_f(p, g, tolerance)?,
        });
    }
    if pred.len() != frames {
        return Err(MetricsError::ExtraFrames {
            video,
            expression: expression_id.to_string(),
            frames,
        });
    }
    let n = frames as f64;
    let mean_j = scores.iter().map(|s| s.j).sum::<f64>() / n;
    let mean_f = scores.iter().map(|s| s.f).sum::<f64>() / n;
    Ok(ExpressionScore {
        video_id: video,
        expression_id: expression_id.to_string(),
        mean_j,
        mean_f,
        jf: jf_mean(mean_j, mean_f),
        frames: scores,
    })
}

/// Unweighted means over expressions. Summation runs in (video, expression)
/// order so the result does not depend on input order.
pub fn score_dataset(scores: &[ExpressionScore]) -> Result<DatasetScore, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::NoExpressions);
    }
    let mut ordered: Vec<&ExpressionScore> = scores.iter().collect();
    ordered.sort_by(|a, b| {
        (a.video_id.as_str(), a.expression_id.as_str()).cmp(&(b.video_id.as_str(), b.expression_id.as_str()))
    });
    let n = ordered.len() as f64;
    let j = ordered.iter().map(|s| s.mean_j).sum::<f64>() / n;
    let f = ordered.iter().map(|s| s.mean_f).sum::<f64>() / n;
    Ok(DatasetScore {
        expression_count: ordered.len(),
        j,
        f,
        jf: jf_mean(j, f),
    })
}
