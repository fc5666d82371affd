//! Importer for MeViS-style expression files.
//!
//! Expected layout:
//!
//! ```text
//! meta_expressions.json   {"videos": {"<video>": {"frames": ["00000", ...],
//!                           "expressions": {"0": {"exp": "...", "anno_id": [1, 2]}}}}}
//! JPEGImages/<video>/<frame>.jpg     (or .png)
//! <annotations_root>/<video>/<frame>.png   label image, pixel value = anno_id
//! ```
//!
//! Each expression's `anno_id` list becomes its `object_ids`; when absent,
//! `obj_id` is used instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::manifest::{DatasetManifest, ExpressionRecord, VideoRecord};
use super::maskio::read_labels;
use super::{io_err, DataError};

#[derive(Debug, Deserialize)]
struct MetaFile {
    videos: BTreeMap<String, MetaVideo>,
}

#[derive(Debug, Deserialize)]
struct MetaVideo {
    frames: Vec<String>,
    #[serde(default)]
    expressions: BTreeMap<String, MetaExpression>,
}

#[derive(Debug, Deserialize)]
struct MetaExpression {
    exp: String,
    #[serde(default)]
    anno_id: Option<Vec<u32>>,
    #[serde(default)]
    obj_id: Option<Vec<u32>>,
}

fn absolute(path: PathBuf) -> Result<PathBuf, DataError> {
    std::path::absolute(&path).map_err(io_err(path))
}

fn find_frame(dir: &Path, stem: &str) -> Result<PathBuf, DataError> {
    for ext in ["jpg", "jpeg", "png"] {
        let p = dir.join(format!("{stem}.{ext}"));
        if p.exists() {
            return absolute(p);
        }
    }
    Err(DataError::Missing {
        path: dir.join(format!("{stem}.jpg")),
    })
}

/// Numeric keys sort numerically, the rest lexicographically after them.
fn expression_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Converts a MeViS-style expression file into a canonical manifest.
///
/// Frames are looked up under `frames_root` (default: `JPEGImages` next to the
/// meta file). Every path in the result is absolute, so the manifest can be
/// saved anywhere.
pub fn import_mevis_meta(
    meta_path: &Path,
    annotations_root: &Path,
    frames_root: Option<&Path>,
) -> Result<DatasetManifest, DataError> {
    let text = fs::read_to_string(meta_path).map_err(io_err(meta_path))?;
    let meta: MetaFile = serde_json::from_str(&text).map_err(|source| DataError::Json {
        path: meta_path.to_path_buf(),
        source,
    })?;
    let default_frames = meta_path.parent().unwrap_or(Path::new(".")).join("JPEGImages");
    let frames_root = frames_root.unwrap_or(&default_frames);
    let dataset = meta_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mevis".into());
    let mut manifest = DatasetManifest::new(dataset);

    let schema = |message: String| DataError::Schema {
        path: meta_path.to_path_buf(),
        message,
    };
    for (vid, video) in &meta.videos {
        if video.expressions.is_empty() {
            continue;
        }
        if video.frames.is_empty() {
            return Err(schema(format!("video '{vid}' lists no frames")));
        }
        let mut frames = Vec::with_capacity(video.frames.len());
        let mut annotations = Vec::with_capacity(video.frames.len());
        let mut dims = None;
        let mut present = BTreeSet::new();
        for stem in &video.frames {
            frames.push(find_frame(&frames_root.join(vid), stem)?);
            let ann = annotations_root.join(vid).join(format!("{stem}.png"));
            if !ann.exists() {
                return Err(DataError::Missing { path: ann });
            }
            let grid = read_labels(&ann)?;
            match dims {
                None => dims = Some(grid.dims()),
                Some(d) if d != grid.dims() => {
                    return Err(DataError::Dimensions {
                        path: ann,
                        expected: d,
                        actual: grid.dims(),
                    })
                }
                Some(_) => {}
            }
            present.extend(grid.present_labels().into_iter().map(u32::from));
            annotations.push(absolute(ann)?);
        }
        let (height, width) = dims.expect("at least one frame");
        manifest.videos.push(VideoRecord {
            id: vid.clone(),
            height,
            width,
            frames: frames.iter().map(|p| p.to_string_lossy().into_owned()).collect(),
            annotations: annotations.iter().map(|p| p.to_string_lossy().into_owned()).collect(),
        });

        let mut keys: Vec<&String> = video.expressions.keys().collect();
        keys.sort_by(|a, b| expression_order(a, b));
        for key in keys {
            let e = &video.expressions[key];
            let ids = e
                .anno_id
                .as_ref()
                .or(e.obj_id.as_ref())
                .ok_or_else(|| schema(format!("expression '{key}' of '{vid}' has no anno_id or obj_id")))?;
            let object_ids: BTreeSet<u32> = ids.iter().copied().collect();
            if object_ids.is_empty() {
                return Err(schema(format!("expression '{key}' of '{vid}' has an empty id list")));
            }
            if let Some(bad) = object_ids.iter().find(|id| **id == 0 || !present.contains(id)) {
                return Err(schema(format!(
                    "expression '{key}' of '{vid}' refers to id {bad}, absent from its annotations"
                )));
            }
            manifest.expressions.push(ExpressionRecord {
                id: key.clone(),
                video_id: vid.clone(),
                text: e.exp.clone(),
                object_ids: object_ids.into_iter().collect(),
            });
        }
    }
    if manifest.expressions.is_empty() {
        log::warn!("{}: no expressions found; manifest is empty", meta_path.display());
    }
    Ok(manifest)
}
