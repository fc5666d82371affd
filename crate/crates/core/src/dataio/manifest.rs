//! The canonical dataset manifest and its loader.
//!
//! ```json
//! {
//!   "schema": "rvosh-manifest/1",
//!   "dataset": "static",
//!   "videos": [{"id": "v0", "height": 48, "width": 64,
//!               "frames": ["frames/v0/00000.png", ...],
//!               "annotations": ["annotations/v0/00000.png", ...]}],
//!   "expressions": [{"id": "e0", "video_id": "v0", "text": "the red ball",
//!                    "object_ids": [1]}]
//! }
//! ```
//!
//! Paths are relative to the manifest's directory unless absolute.
//! Annotations are per-frame label images; an expression's ground truth is the
//! union of its `object_ids` labels.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backends::{ToyNoiseConfig, ToyPredictor};
use crate::types::{ExpressionTask, FrameRef, LabelGrid, MaskTrack, VideoSequence};

use super::maskio::read_labels;
use super::{io_err, DataError};

pub const MANIFEST_SCHEMA: &str = "rvosh-manifest/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub height: usize,
    pub width: usize,
    pub frames: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpressionRecord {
    pub id: String,
    pub video_id: String,
    pub text: String,
    pub object_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema: String,
    pub dataset: String,
    pub videos: Vec<VideoRecord>,
    pub expressions: Vec<ExpressionRecord>,
}

impl DatasetManifest {
    pub fn new(dataset: impl Into<String>) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.to_string(),
            dataset: dataset.into(),
            videos: Vec::new(),
            expressions: Vec::new(),
        }
    }

    /// Canonical text form: pretty JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        fs::write(path, self.to_canonical_string()).map_err(io_err(path))
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, DataError> {
        let m: DatasetManifest = serde_json::from_str(text).map_err(|source| DataError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(DataError::Schema {
                path: path.to_path_buf(),
                message: format!("schema '{}' is not {MANIFEST_SCHEMA}", m.schema),
            });
        }
        Ok(m)
    }
}

/// A validated, fully loaded dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub root: PathBuf,
    pub videos: Vec<VideoSequence>,
    pub annotations: HashMap<String, Arc<Vec<LabelGrid>>>,
    pub tasks: Vec<ExpressionTask>,
}

impl Dataset {
    pub fn video(&self, id: &str) -> Option<&VideoSequence> {
        self.videos.iter().find(|v| v.id() == id)
    }

    /// Toy predictor answering from this dataset's annotations.
    pub fn toy_predictor(&self, noise: ToyNoiseConfig) -> ToyPredictor {
        let mut p = ToyPredictor::new(noise);
        for (vid, labels) in &self.annotations {
            p.add_video(vid.clone(), labels.as_ref().clone());
        }
        for t in &self.tasks {
            p.add_expression(t.video_id.clone(), t.expression_id.clone(), t.object_ids.clone());
        }
        p
    }

    /// Same dataset with every frame decoded into memory.
    pub fn preloaded(&self) -> Result<Dataset, DataError> {
        let videos = self.videos.iter().map(|v| v.preload()).collect::<Result<Vec<_>, _>>()?;
        Ok(Dataset { videos, ..self.clone() })
    }
}

fn schema_err(path: &Path, message: String) -> DataError {
    DataError::Schema {
        path: path.to_path_buf(),
        message,
    }
}

fn image_dims(path: &Path) -> Result<(usize, usize), DataError> {
    if !path.exists() {
        return Err(DataError::Missing {
            path: path.to_path_buf(),
        });
    }
    let (w, h) = image::image_dimensions(path).map_err(|e| DataError::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((h as usize, w as usize))
}

/// Loads and validates a manifest, reading every frame header and annotation.
pub fn load_manifest(path: &Path) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let manifest = DatasetManifest::parse(path, &text)?;
    let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let mut videos = Vec::with_capacity(manifest.videos.len());
    let mut annotations = HashMap::new();
    let mut seen = HashSet::new();
    for rec in &manifest.videos {
        if !seen.insert(rec.id.as_str()) {
            return Err(schema_err(path, format!("duplicate video id '{}'", rec.id)));
        }
        if rec.frames.is_empty() {
            return Err(schema_err(path, format!("video '{}' lists no frames", rec.id)));
        }
        let dims = (rec.height, rec.width);
        let mut frames = Vec::with_capacity(rec.frames.len());
        for f in &rec.frames {
            let p = root.join(f);
            let actual = image_dims(&p)?;
            if actual != dims {
                return Err(DataError::Dimensions {
                    path: p,
                    expected: dims,
                    actual,
                });
            }
            frames.push(FrameRef::Path(p));
        }
        if !rec.annotations.is_empty() {
            if rec.annotations.len() != rec.frames.len() {
                return Err(schema_err(
                    path,
                    format!(
                        "video '{}' has {} frames but {} annotations",
                        rec.id,
                        rec.frames.len(),
                        rec.annotations.len()
                    ),
                ));
            }
            let mut grids = Vec::with_capacity(rec.annotations.len());
            for a in &rec.annotations {
                let p = root.join(a);
                if !p.exists() {
                    return Err(DataError::Missing { path: p });
                }
                let grid = read_labels(&p)?;
                if grid.dims() != dims {
                    return Err(DataError::Dimensions {
                        path: p,
                        expected: dims,
                        actual: grid.dims(),
                    });
                }
                grids.push(grid);
            }
            annotations.insert(rec.id.clone(), Arc::new(grids));
        }
        videos.push(VideoSequence::new(rec.id.clone(), rec.height, rec.width, frames)?);
    }

    let mut tasks = Vec::with_capacity(manifest.expressions.len());
    let mut seen = HashSet::new();
    for rec in &manifest.expressions {
        let Some(video) = videos.iter().find(|v| v.id() == rec.video_id) else {
            return Err(schema_err(
                path,
                format!("expression '{}' references unknown video '{}'", rec.id, rec.video_id),
            ));
        };
        if !seen.insert((rec.video_id.as_str(), rec.id.as_str())) {
            return Err(schema_err(
                path,
                format!("duplicate expression '{}' in video '{}'", rec.id, rec.video_id),
            ));
        }
        if let Some(bad) = rec.object_ids.iter().find(|&&id| id == 0 || id > 255) {
            return Err(schema_err(
                path,
                format!("expression '{}' has object id {bad} outside 1..=255", rec.id),
            ));
        }
        let object_ids: BTreeSet<u32> = rec.object_ids.iter().copied().collect();
        let ground_truth = match annotations.get(&rec.video_id) {
            Some(grids) => {
                if object_ids.is_empty() {
                    return Err(schema_err(path, format!("expression '{}' has no object ids", rec.id)));
                }
                Some(MaskTrack::from_entries(
                    rec.video_id.clone(),
                    grids.iter().enumerate().map(|(i, g)| (i, g.select(&object_ids))),
                )?)
            }
            None => None,
        };
        let task = ExpressionTask {
            video_id: rec.video_id.clone(),
            expression_id: rec.id.clone(),
            text: rec.text.clone(),
            object_ids,
            ground_truth,
        };
        task.validate(video.frame_count(), video.dims())?;
        tasks.push(task);
    }

    Ok(Dataset {
        manifest,
        root,
        videos,
        annotations,
        tasks,
    })
}
