//! Deterministic synthetic scenes: flat-coloured disks and rectangles moving
//! over a flat background, with per-object ground truth.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::types::{ExpressionTask, LabelGrid, MaskTrack, RgbFrame, Seed, VideoSequence};

use super::manifest::{Dataset, DatasetManifest, ExpressionRecord, VideoRecord};
use super::maskio::{mask_file_name, write_labels};
use super::{io_err, DataError};

/// Colour tolerance the scene colours are checked against; matches the toy
/// propagator's default.
pub const SCENE_COLOR_TOLERANCE: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk { radius: u32 },
    Rectangle { half_height: u32, half_width: u32 },
}

impl Shape {
    fn contains(&self, dr: i64, dc: i64) -> bool {
        match *self {
            Shape::Disk { radius } => dr * dr + dc * dc <= i64::from(radius) * i64::from(radius),
            Shape::Rectangle {
                half_height,
                half_width,
            } => dr.abs() <= i64::from(half_height) && dc.abs() <= i64::from(half_width),
        }
    }

    fn extent(&self) -> (i64, i64) {
        match *self {
            Shape::Disk { radius } => (i64::from(radius), i64::from(radius)),
            Shape::Rectangle {
                half_height,
                half_width,
            } => (i64::from(half_height), i64::from(half_width)),
        }
    }
}

/// Object centre per frame as `[row, col]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Trajectory {
    Static {
        center: [i64; 2],
    },
    /// Centre at frame `f` is `start + f * velocity`, rounded.
    Linear {
        start: [f64; 2],
        velocity: [f64; 2],
    },
    /// Explicit centre for every frame of the video.
    Path {
        centers: Vec<[i64; 2]>,
    },
}

impl Trajectory {
    pub fn center(&self, frame: usize) -> [i64; 2] {
        match self {
            Trajectory::Static { center } => *center,
            Trajectory::Linear { start, velocity } => {
                let f = frame as f64;
                [
                    (start[0] + f * velocity[0]).round() as i64,
                    (start[1] + f * velocity[1]).round() as i64,
                ]
            }
            Trajectory::Path { centers } => centers[frame],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    /// Label value in annotation images; must be in 1..=255.
    pub id: u8,
    pub shape: Shape,
    pub color: [u8; 3],
    pub trajectory: Trajectory,
    /// Inclusive `[first, last]` frames in which the object is drawn.
    /// Absent means the whole video.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible: Option<[usize; 2]>,
}

impl SceneObject {
    pub fn is_visible(&self, frame: usize) -> bool {
        match self.visible {
            Some([first, last]) => first <= frame && frame <= last,
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSceneSpec {
    pub id: String,
    pub frame_count: usize,
    pub height: usize,
    pub width: usize,
    pub background: [u8; 3],
    pub objects: Vec<SceneObject>,
    /// Maximum per-channel perturbation added to every pixel.
    #[serde(default)]
    pub pixel_noise: u8,
    #[serde(default)]
    pub seed: Seed,
}

fn color_distance(a: [u8; 3], b: [u8; 3]) -> u8 {
    (0..3).map(|c| a[c].abs_diff(b[c])).max().unwrap_or(0)
}

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let err = |m: String| Err(DataError::Scene(format!("{}: {m}", self.id)));
        if self.frame_count == 0 || self.height == 0 || self.width == 0 {
            return err("frame count and dimensions must be positive".into());
        }
        if u32::from(self.pixel_noise) * 2 > u32::from(SCENE_COLOR_TOLERANCE) {
            return err(format!(
                "pixel noise {} exceeds half the colour tolerance {SCENE_COLOR_TOLERANCE}",
                self.pixel_noise
            ));
        }
        let min_gap = u32::from(SCENE_COLOR_TOLERANCE) * 2;
        let mut ids = BTreeSet::new();
        for (i, obj) in self.objects.iter().enumerate() {
            if obj.id == 0 || !ids.insert(obj.id) {
                return err(format!("object id {} is zero or repeated", obj.id));
            }
            if u32::from(color_distance(obj.color, self.background)) <= min_gap {
                return err(format!(
                    "object {} colour is within {min_gap} of the background",
                    obj.id
                ));
            }
            for other in &self.objects[..i] {
                if u32::from(color_distance(obj.color, other.color)) <= min_gap {
                    return err(format!(
                        "objects {} and {} have colours within {min_gap}",
                        other.id, obj.id
                    ));
                }
            }
            if let Some([first, last]) = obj.visible {
                if first > last || last >= self.frame_count {
                    return err(format!(
                        "object {} visibility window [{first}, {last}] is invalid",
                        obj.id
                    ));
                }
            }
            if let Trajectory::Path { centers } = &obj.trajectory {
                if centers.len() != self.frame_count {
                    return err(format!(
                        "object {} path has {} centres for {} frames",
                        obj.id,
                        centers.len(),
                        self.frame_count
                    ));
                }
            }
            for f in (0..self.frame_count).filter(|&f| obj.is_visible(f)) {
                let [r, c] = obj.trajectory.center(f);
                if r < 0 || c < 0 || r >= self.height as i64 || c >= self.width as i64 {
                    return err(format!("object {} centre ({r}, {c}) leaves the frame at {f}", obj.id));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub video: VideoSequence,
    pub labels: Vec<LabelGrid>,
    /// Visible pixels of each object, keyed by object id.
    pub objects: BTreeMap<u8, MaskTrack>,
}

impl GeneratedScene {
    /// Union of the visible pixels of `ids`.
    pub fn ground_truth(&self, ids: &BTreeSet<u32>) -> MaskTrack {
        MaskTrack::from_entries(
            self.video.id().to_string(),
            self.labels.iter().enumerate().map(|(i, g)| (i, g.select(ids))),
        )
        .expect("labels share the video dimensions")
    }
}

/// Renders a scene: background fill, then objects in listing order so later
/// objects occlude earlier ones.
pub fn generate_scene(spec: &SyntheticSceneSpec) -> Result<GeneratedScene, DataError> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let mut rng = spec.seed.derive(&[&spec.id, "pixels"]).rng();
    let mut frames = Vec::with_capacity(spec.frame_count);
    let mut labels = Vec::with_capacity(spec.frame_count);
    for f in 0..spec.frame_count {
        let mut frame = RgbFrame::filled(h, w, spec.background)?;
        let mut grid = vec![0u8; h * w];
        for obj in spec.objects.iter().filter(|o| o.is_visible(f)) {
            let [cr, cc] = obj.trajectory.center(f);
            let (er, ec) = obj.shape.extent();
            let rows = (cr - er).max(0)..=(cr + er).min(h as i64 - 1);
            for r in rows {
                for c in (cc - ec).max(0)..=(cc + ec).min(w as i64 - 1) {
                    if obj.shape.contains(r - cr, c - cc) {
                        frame.set(r as usize, c as usize, obj.color);
                        grid[r as usize * w + c as usize] = obj.id;
                    }
                }
            }
        }
        if spec.pixel_noise > 0 {
            let n = i16::from(spec.pixel_noise);
            for r in 0..h {
                for c in 0..w {
                    let px = frame.get(r, c);
                    let noisy = px.map(|v| (i16::from(v) + rng.random_range(-n..=n)).clamp(0, 255) as u8);
                    frame.set(r, c, noisy);
                }
            }
        }
        frames.push(frame);
        labels.push(LabelGrid::new(h, w, grid)?);
    }
    let video = VideoSequence::from_frames(spec.id.clone(), frames)?;
    let objects = spec
        .objects
        .iter()
        .map(|o| {
            let ids = BTreeSet::from([u32::from(o.id)]);
            let track = MaskTrack::from_entries(
                spec.id.clone(),
                labels.iter().enumerate().map(|(i, g)| (i, g.select(&ids))),
            )?;
            Ok((o.id, track))
        })
        .collect::<Result<BTreeMap<_, _>, DataError>>()?;
    Ok(GeneratedScene { video, labels, objects })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneExpression {
    pub id: String,
    pub text: String,
    pub object_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene: SyntheticSceneSpec,
    pub expressions: Vec<SceneExpression>,
}

/// A whole synthetic dataset; also the on-disk format accepted by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDataset {
    pub dataset: String,
    pub scenes: Vec<SceneEntry>,
}

impl SceneDataset {
    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| DataError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn scene_records(entry: &SceneEntry, manifest: &mut DatasetManifest) -> Result<(), DataError> {
    let vid = entry.scene.id.as_str();
    let names: Vec<String> = (0..entry.scene.frame_count).map(mask_file_name).collect();
    manifest.videos.push(VideoRecord {
        id: vid.to_string(),
        height: entry.scene.height,
        width: entry.scene.width,
        frames: names.iter().map(|n| format!("frames/{vid}/{n}")).collect(),
        annotations: names.iter().map(|n| format!("annotations/{vid}/{n}")).collect(),
    });
    let known: BTreeSet<u32> = entry.scene.objects.iter().map(|o| u32::from(o.id)).collect();
    for e in &entry.expressions {
        if let Some(bad) = e.object_ids.iter().find(|id| !known.contains(id)) {
            return Err(DataError::Scene(format!(
                "{vid}: expression '{}' names unknown object {bad}",
                e.id
            )));
        }
        manifest.expressions.push(ExpressionRecord {
            id: e.id.clone(),
            video_id: vid.to_string(),
            text: e.text.clone(),
            object_ids: e.object_ids.clone(),
        });
    }
    Ok(())
}

/// Renders a synthetic dataset straight into memory, with the manifest that
/// [`write_scene_dataset`] would write.
pub fn generate_dataset(ds: &SceneDataset) -> Result<Dataset, DataError> {
    let mut manifest = DatasetManifest::new(ds.dataset.clone());
    let mut videos = Vec::with_capacity(ds.scenes.len());
    let mut annotations = HashMap::new();
    let mut tasks = Vec::new();
    for entry in &ds.scenes {
        scene_records(entry, &mut manifest)?;
        let scene = generate_scene(&entry.scene)?;
        for e in &entry.expressions {
            let object_ids: BTreeSet<u32> = e.object_ids.iter().copied().collect();
            tasks.push(ExpressionTask {
                video_id: entry.scene.id.clone(),
                expression_id: e.id.clone(),
                text: e.text.clone(),
                ground_truth: Some(scene.ground_truth(&object_ids)),
                object_ids,
            });
        }
        annotations.insert(entry.scene.id.clone(), Arc::new(scene.labels));
        videos.push(scene.video);
    }
    Ok(Dataset {
        manifest,
        root: PathBuf::from("."),
        videos,
        annotations,
        tasks,
    })
}

/// Writes frames, annotations and `manifest.json` under `out`, returning the
/// manifest path.
///
/// Layout: `frames/<video>/NNNNN.png`, `annotations/<video>/NNNNN.png`.
pub fn write_scene_dataset(ds: &SceneDataset, out: &Path) -> Result<PathBuf, DataError> {
    let mut manifest = DatasetManifest::new(ds.dataset.clone());
    for entry in &ds.scenes {
        scene_records(entry, &mut manifest)?;
        let scene = generate_scene(&entry.scene)?;
        let vid = entry.scene.id.as_str();
        let frame_dir = out.join("frames").join(vid);
        let ann_dir = out.join("annotations").join(vid);
        fs::create_dir_all(&frame_dir).map_err(io_err(&frame_dir))?;
        fs::create_dir_all(&ann_dir).map_err(io_err(&ann_dir))?;
        for (i, grid) in scene.labels.iter().enumerate() {
            let name = mask_file_name(i);
            scene.video.load_frame(i)?.save_png(&frame_dir.join(&name))?;
            write_labels(&ann_dir.join(&name), grid)?;
        }
    }
    let path = out.join("manifest.json");
    manifest.save(&path)?;
    Ok(path)
}
