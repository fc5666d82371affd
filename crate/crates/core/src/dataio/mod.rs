//! Dataset manifests, annotation import, mask codecs, synthetic scenes and
//! report output.

pub mod manifest;
pub mod maskio;
pub mod mevis;
pub mod presets;
pub mod report;
pub mod rle;
pub mod synth;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::types::{FrameError, ShapeError};

pub use manifest::{load_manifest, Dataset, DatasetManifest, ExpressionRecord, VideoRecord, MANIFEST_SCHEMA};
pub use maskio::{read_masks, write_masks};
pub use mevis::import_mevis_meta;
pub use presets::{preset, PRESET_NAMES};
pub use report::{format_percent, format_row, write_report, Report, ReportFormat};
pub use rle::{rle_decode, rle_encode, RleText};
pub use synth::{
    generate_dataset, generate_scene, write_scene_dataset, GeneratedScene, SceneDataset, SceneEntry, SceneExpression,
    SceneObject, Shape, SyntheticSceneSpec, Trajectory,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: file not found")]
    Missing { path: PathBuf },
    #[error("{path}: image is {actual:?}, expected {expected:?}")]
    Dimensions {
        path: PathBuf,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("{path}: cannot decode PNG: {message}")]
    Png { path: PathBuf, message: String },
    #[error("{path}: non-binary annotation (pixel value {value})")]
    NonBinary { path: PathBuf, value: u8 },
    #[error("{path}: no frames")]
    NoFrames { path: PathBuf },
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> DataError {
    let path = path.into();
    move |source| DataError::Io { path, source }
}
