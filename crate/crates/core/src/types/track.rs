use std::collections::{BTreeMap, BTreeSet};

use super::{BinaryMask, ShapeError};

/// Per-frame masks of one expression over one video.
///
/// A track is full when it holds a mask for every frame `0..I`; otherwise it is
/// partial (e.g. the initial predictions on sampled frames only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTrack {
    video_id: String,
    dims: Option<(usize, usize)>,
    entries: BTreeMap<usize, BinaryMask>,
}

impl MaskTrack {
    pub fn new(video_id: impl Into<String>) -> Self {
        Self {
            video_id: video_id.into(),
            dims: None,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        video_id: impl Into<String>,
        entries: impl IntoIterator<Item = (usize, BinaryMask)>,
    ) -> Result<Self, ShapeError> {
        let mut track = Self::new(video_id);
        for (frame, mask) in entries {
            track.insert(frame, mask)?;
        }
        Ok(track)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    /// Shared `(height, width)` of the masks, if any were inserted.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    /// Inserts or replaces the mask for `frame`.
    pub fn insert(&mut self, frame: usize, mask: BinaryMask) -> Result<(), ShapeError> {
        match self.dims {
            Some(d) if d != mask.dims() => {
                return Err(ShapeError::DimensionMismatch {
                    expected: d,
                    actual: mask.dims(),
                })
            }
            _ => self.dims = Some(mask.dims()),
        }
        self.entries.insert(frame, mask);
        Ok(())
    }

    pub fn get(&self, frame: usize) -> Option<&BinaryMask> {
        self.entries.get(&frame)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frames(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BinaryMask)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// True iff the key set is exactly `0..frame_count`.
    pub fn is_full(&self, frame_count: usize) -> bool {
        self.entries.len() == frame_count && self.entries.keys().copied().eq(0..frame_count)
    }
}

impl IntoIterator for MaskTrack {
    type Item = (usize, BinaryMask);
    type IntoIter = std::collections::btree_map::IntoIter<usize, BinaryMask>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}

/// One referring expression over one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionTask {
    pub video_id: String,
    pub expression_id: String,
    pub text: String,
    pub object_ids: BTreeSet<u32>,
    pub ground_truth: Option<MaskTrack>,
}

impl ExpressionTask {
    /// Checks the ground-truth invariants against a video of `frame_count`
    /// frames and the given dimensions.
    pub fn validate(&self, frame_count: usize, dims: (usize, usize)) -> Result<(), ShapeError> {
        let Some(gt) = &self.ground_truth else {
            return Ok(());
        };
        if self.object_ids.is_empty() {
            return Err(ShapeError::MissingObjectIds {
                expression: self.expression_id.clone(),
            });
        }
        if !gt.is_full(frame_count) {
            return Err(ShapeError::GroundTruthLength {
                expression: self.expression_id.clone(),
                expected: frame_count,
                actual: gt.len(),
            });
        }
        if let Some(d) = gt.dims() {
            if d != dims {
                return Err(ShapeError::DimensionMismatch {
                    expected: dims,
                    actual: d,
                });
            }
        }
        Ok(())
    }
}
