//! Bundled synthetic datasets.
//!
//! * `static`: two motionless objects visible throughout.
//! * `late-appearance`: a disk that enters halfway through the video and is
//!   briefly hidden behind a box.
//! * `two-object-conflict`: a target visible from frame 0 and a distractor of a
//!   different colour that shows up later; the toy predictor's identity swaps
//!   can only pick the distractor once it is on screen.

use super::synth::{SceneDataset, SceneEntry, SceneExpression, SceneObject, Shape, SyntheticSceneSpec, Trajectory};
use crate::types::Seed;

pub const PRESET_NAMES: [&str; 3] = ["static", "late-appearance", "two-object-conflict"];

const BACKGROUND: [u8; 3] = [20, 20, 20];
const RED: [u8; 3] = [220, 40, 40];
const GREEN: [u8; 3] = [40, 200, 60];
const BLUE: [u8; 3] = [50, 70, 220];
const CYAN: [u8; 3] = [40, 200, 220];

pub fn preset(name: &str) -> Option<SceneDataset> {
    match name {
        "static" => Some(static_preset()),
        "late-appearance" => Some(late_appearance()),
        "two-object-conflict" => Some(two_object_conflict()),
        _ => None,
    }
}

fn expression(id: &str, text: &str, object_ids: &[u32]) -> SceneExpression {
    SceneExpression {
        id: id.into(),
        text: text.into(),
        object_ids: object_ids.to_vec(),
    }
}

fn scene(id: &str, frame_count: usize, objects: Vec<SceneObject>) -> SyntheticSceneSpec {
    SyntheticSceneSpec {
        id: id.into(),
        frame_count,
        height: 48,
        width: 64,
        background: BACKGROUND,
        objects,
        pixel_noise: 0,
        seed: Seed(0),
    }
}

fn static_preset() -> SceneDataset {
    let ball = SceneObject {
        id: 1,
        shape: Shape::Disk { radius: 6 },
        color: RED,
        trajectory: Trajectory::Static { center: [16, 18] },
        visible: None,
    };
    let block = SceneObject {
        id: 2,
        shape: Shape::Rectangle {
            half_height: 6,
            half_width: 9,
        },
        color: GREEN,
        trajectory: Trajectory::Static { center: [30, 44] },
        visible: None,
    };
    SceneDataset {
        dataset: "static".into(),
        scenes: vec![SceneEntry {
            scene: scene("static-0", 10, vec![ball, block]),
            expressions: vec![
                expression("red-ball", "the red ball", &[1]),
                expression("green-box", "the green box", &[2]),
            ],
        }],
    }
}

fn late_appearance() -> SceneDataset {
    let disk = SceneObject {
        id: 1,
        shape: Shape::Disk { radius: 5 },
        color: RED,
        trajectory: Trajectory::Linear {
            start: [24.0, -16.0],
            velocity: [0.0, 6.0],
        },
        visible: Some([6, 11]),
    };
    // Listed after the disk so it occludes it; the disk is fully hidden at frame 8.
    let wall = SceneObject {
        id: 2,
        shape: Shape::Rectangle {
            half_height: 10,
            half_width: 6,
        },
        color: BLUE,
        trajectory: Trajectory::Static { center: [24, 32] },
        visible: None,
    };
    SceneDataset {
        dataset: "late-appearance".into(),
        scenes: vec![SceneEntry {
            scene: scene("late-0", 12, vec![disk, wall]),
            expressions: vec![
                expression("red-disk", "the red disk rolling in from the left", &[1]),
                expression("blue-wall", "the blue wall", &[2]),
            ],
        }],
    }
}

fn two_object_conflict() -> SceneDataset {
    let scenes = [(8usize, 20i64), (10, 32), (12, 44)]
        .iter()
        .enumerate()
        .map(|(i, &(appears, col))| {
            let target = SceneObject {
                id: 1,
                shape: Shape::Disk { radius: 5 },
                color: RED,
                trajectory: Trajectory::Linear {
                    start: [14.0, 8.0],
                    velocity: [0.0, 2.0],
                },
                visible: None,
            };
            let distractor = SceneObject {
                id: 2,
                shape: Shape::Disk { radius: 6 },
                color: CYAN,
                trajectory: Trajectory::Static { center: [34, col] },
                visible: Some([appears, 19]),
            };
            SceneEntry {
                scene: scene(&format!("conflict-{i}"), 20, vec![target, distractor]),
                expressions: vec![expression("target", "the red ball moving right", &[1])],
            }
        })
        .collect();
    SceneDataset {
        dataset: "two-object-conflict".into(),
        scenes,
    }
}
