//! Deterministic toy backends.
//!
//! The toy predictor reads ground truth from label annotations and corrupts it
//! in controlled ways. The toy propagator tracks an object by colour: it takes
//! the mean colour under the nearest remembered mask and keeps the colour
//! matched connected components that touch the neighbourhood of that mask.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::morphology::{connected_components, dilate, dilate_signed};
use crate::pipeline::Direction;
use crate::types::{BinaryMask, LabelGrid, MaskTrack, RgbFrame, Seed, VideoSequence};

use super::{BackendError, PredictorBackend, PredictorRequest, PropagateRequest, PropagatorBackend};

/// How the toy predictor degrades ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyNoiseConfig {
    /// Per-frame probability of answering with the largest distractor.
    pub swap_probability: f64,
    /// Chebyshev dilation radius; negative values erode.
    pub dilation_radius: i32,
    pub seed: Seed,
}

impl ToyNoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            swap_probability: 0.0,
            dilation_radius: 0,
            seed: Seed(0),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.swap_probability) {
            return Err(format!(
                "swap probability must lie in [0, 1], got {}",
                self.swap_probability
            ));
        }
        Ok(())
    }
}

impl Default for ToyNoiseConfig {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Largest object in `labels` that is not part of `object_ids`, if any is
/// visible. Ties go to the lower label.
fn largest_distractor(labels: &LabelGrid, object_ids: &BTreeSet<u32>) -> Option<u8> {
    let mut areas = [0usize; 256];
    for &l in labels.labels() {
        areas[l as usize] += 1;
    }
    (1..=255u8)
        .filter(|l| !object_ids.contains(&u32::from(*l)) && areas[*l as usize] > 0)
        .max_by(|a, b| areas[*a as usize].cmp(&areas[*b as usize]).then(b.cmp(a)))
}

/// Ground truth on the requested frames, optionally swapped for a distractor
/// and dilated or eroded.
pub fn toy_predict(
    req: &PredictorRequest<'_>,
    labels: &[LabelGrid],
    object_ids: &BTreeSet<u32>,
    noise: &ToyNoiseConfig,
) -> Result<MaskTrack, BackendError> {
    let mut out = MaskTrack::new(req.video.id());
    for &frame in req.indices {
        let grid = labels
            .get(frame)
            .ok_or_else(|| BackendError::MissingOracle(format!("frame {frame} of video {}", req.video.id())))?;
        let frame_tag = frame.to_string();
        let draw: f64 = noise
            .seed
            .derive(&[req.video.id(), req.expression_id, "predict", &frame_tag])
            .rng()
            .random();
        let mut mask = grid.select(object_ids);
        if draw < noise.swap_probability {
            if let Some(d) = largest_distractor(grid, object_ids) {
                mask = grid.select(&BTreeSet::from([u32::from(d)]));
            }
        }
        out.insert(frame, dilate_signed(&mask, noise.dilation_radius))?;
    }
    Ok(out)
}

/// Ground-truth-backed predictor over a whole dataset.
#[derive(Debug, Clone, Default)]
pub struct ToyPredictor {
    labels: HashMap<String, Arc<Vec<LabelGrid>>>,
    objects: HashMap<(String, String), BTreeSet<u32>>,
    noise: ToyNoiseConfig,
}

impl ToyPredictor {
    pub fn new(noise: ToyNoiseConfig) -> Self {
        Self {
            noise,
            ..Self::default()
        }
    }

    pub fn add_video(&mut self, video_id: impl Into<String>, labels: Vec<LabelGrid>) {
        self.labels.insert(video_id.into(), Arc::new(labels));
    }

    pub fn add_expression(
        &mut self,
        video_id: impl Into<String>,
        expression_id: impl Into<String>,
        object_ids: BTreeSet<u32>,
    ) {
        self.objects.insert((video_id.into(), expression_id.into()), object_ids);
    }
}

impl PredictorBackend for ToyPredictor {
    fn predict(&self, req: &PredictorRequest<'_>) -> Result<MaskTrack, BackendError> {
        let vid = req.video.id();
        let labels = self
            .labels
            .get(vid)
            .ok_or_else(|| BackendError::MissingOracle(format!("video {vid}")))?;
        let ids = self
            .objects
            .get(&(vid.to_string(), req.expression_id.to_string()))
            .ok_or_else(|| BackendError::MissingOracle(format!("expression {vid}/{}", req.expression_id)))?;
        toy_predict(req, labels, ids, &self.noise)
    }
}

/// Prompt masks plus a bounded FIFO of recently tracked masks.
#[derive(Debug, Clone)]
pub struct MemoryBank {
    prompts: Vec<(usize, BinaryMask)>,
    tracked: VecDeque<(usize, BinaryMask)>,
    capacity: usize,
}

/// Which part of the bank a reference came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MemoryKind {
    Prompt,
    Tracked,
}

impl MemoryBank {
    pub fn new(prompts: Vec<(usize, BinaryMask)>, capacity: usize) -> Self {
        Self {
            prompts,
            tracked: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, frame: usize, mask: BinaryMask) {
        if self.capacity == 0 {
            return;
        }
        if self.tracked.len() == self.capacity {
            self.tracked.pop_front();
        }
        self.tracked.push_back((frame, mask));
    }

    pub fn tracked_len(&self) -> usize {
        self.tracked.len()
    }

    pub fn prompt_len(&self) -> usize {
        self.prompts.len()
    }

    /// Entry closest in time to `target`; ties prefer prompts, then the
    /// lower frame index.
    pub fn nearest(&self, target: usize) -> Option<(MemoryKind, usize, &BinaryMask)> {
        let prompts = self.prompts.iter().map(|(f, m)| (MemoryKind::Prompt, *f, m));
        let tracked = self.tracked.iter().map(|(f, m)| (MemoryKind::Tracked, *f, m));
        prompts
            .chain(tracked)
            .min_by_key(|(kind, f, _)| (f.abs_diff(target), *kind, *f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyPropagatorParams {
    /// Max per-channel colour distance to the reference colour.
    pub color_tolerance: u8,
    /// Tracked masks kept besides the prompts.
    pub memory_capacity: usize,
    /// Components must touch the reference mask dilated by this radius.
    pub search_radius: usize,
}

impl Default for ToyPropagatorParams {
    fn default() -> Self {
        Self {
            color_tolerance: 16,
            memory_capacity: 4,
            search_radius: 8,
        }
    }
}

fn mean_color(frame: &RgbFrame, mask: &BinaryMask) -> [f64; 3] {
    let mut sum = [0u64; 3];
    let mut n = 0u64;
    for (p, &on) in frame.pixels().iter().zip(mask.bits()) {
        if on {
            for ch in 0..3 {
                sum[ch] += u64::from(p[ch]);
            }
            n += 1;
        }
    }
    if n == 0 {
        return [0.0; 3];
    }
    sum.map(|s| s as f64 / n as f64)
}

/// Pixels of `frame` within `tolerance` of `color` in every channel.
pub fn color_candidates(frame: &RgbFrame, color: [f64; 3], tolerance: u8) -> BinaryMask {
    let (h, w) = frame.dims();
    let tol = f64::from(tolerance);
    let bits = frame
        .pixels()
        .iter()
        .map(|p| (0..3).all(|ch| (f64::from(p[ch]) - color[ch]).abs() <= tol))
        .collect();
    BinaryMask::from_bits(h, w, bits).expect("frame shape")
}

/// Propagates through `targets` in order, reading references from `bank` and
/// pushing each result back into it.
pub fn toy_propagate(
    video: &VideoSequence,
    targets: &[usize],
    bank: &mut MemoryBank,
    params: &ToyPropagatorParams,
) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
    let mut cache: HashMap<usize, Arc<RgbFrame>> = HashMap::new();
    let mut frame = |i: usize| -> Result<Arc<RgbFrame>, BackendError> {
        if let Some(f) = cache.get(&i) {
            return Ok(Arc::clone(f));
        }
        let f = video.load_frame(i)?;
        cache.insert(i, Arc::clone(&f));
        Ok(f)
    };
    let (h, w) = video.dims();
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let (_, ref_frame, ref_mask) = bank.nearest(t).ok_or(BackendError::EmptyMemoryBank)?;
        if ref_mask.dims() != (h, w) {
            return Err(BackendError::Dimensions {
                frame: ref_frame,
                expected: (h, w),
                actual: ref_mask.dims(),
            });
        }
        let ref_mask = ref_mask.clone();
        let result = if ref_mask.is_empty() {
            BinaryMask::empty(h, w)?
        } else {
            let color = mean_color(&*frame(ref_frame)?, &ref_mask);
            let candidates = color_candidates(&*frame(t)?, color, params.color_tolerance);
            let reach = dilate(&ref_mask, params.search_radius);
            let mut bits = vec![false; h * w];
            for comp in connected_components(&candidates) {
                if comp.iter().any(|&i| reach.bits()[i]) {
                    for i in comp {
                        bits[i] = true;
                    }
                }
            }
            BinaryMask::from_bits(h, w, bits)?
        };
        bank.push(t, result.clone());
        out.push((t, result));
    }
    Ok(out)
}

/// Colour-tracking propagator; one fresh memory bank per segment.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyPropagator {
    pub params: ToyPropagatorParams,
}

impl ToyPropagator {
    pub fn new(params: ToyPropagatorParams) -> Self {
        Self { params }
    }
}

impl PropagatorBackend for ToyPropagator {
    fn propagate(&self, req: &PropagateRequest<'_>) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
        let seg = req.segment;
        debug_assert!(match seg.direction {
            Direction::Forward => seg.target_frames.iter().all(|&t| t > seg.prompt_frame),
            Direction::Backward => seg.target_frames.iter().all(|&t| t < seg.prompt_frame),
        });
        let mut bank = MemoryBank::new(req.prompts.entries().to_vec(), self.params.memory_capacity);
        toy_propagate(req.video, &seg.target_frames, &mut bank, &self.params)
    }
}
