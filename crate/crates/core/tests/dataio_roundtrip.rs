use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvosh_core::dataio::maskio::{write_indexed_png, write_labels};
use rvosh_core::dataio::{
    generate_dataset, import_mevis_meta, load_manifest, preset, read_masks, rle_decode, rle_encode, write_masks,
    write_scene_dataset, DataError, PRESET_NAMES,
};
use rvosh_core::types::{BinaryMask, LabelGrid, MaskTrack, RgbFrame};

fn random_mask(rng: &mut ChaCha8Rng, h: usize, w: usize) -> BinaryMask {
    let p: f64 = rng.random();
    BinaryMask::from_fn(h, w, |_, _| rng.random_bool(p)).unwrap()
}

#[test]
fn mask_directories_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let (h, w) = (rng.random_range(1..40), rng.random_range(1..40));
        let frames = rng.random_range(1..6);
        let track = MaskTrack::from_entries("v", (0..frames).map(|f| (f, random_mask(&mut rng, h, w)))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_masks(&track, dir.path()).unwrap();
        assert_eq!(read_masks(dir.path(), "v").unwrap(), track, "case {case}");
    }
}

#[test]
fn mask_reader_rejects_empty_dirs_and_non_binary_values() {
    let dir = tempfile::tempdir().unwrap();
    let err = read_masks(dir.path(), "v").unwrap_err();
    assert!(err.to_string().contains("no frames"), "{err}");
    write_indexed_png(&dir.path().join("00000.png"), 2, 2, &[0, 1, 3, 0]).unwrap();
    let err = read_masks(dir.path(), "v").unwrap_err();
    assert!(err.to_string().contains("non-binary annotation"), "{err}");
}

#[test]
fn rle_round_trips_seeded_masks() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let (h, w) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let m = random_mask(&mut rng, h, w);
        let text = rle_encode(&m).to_string();
        let back = rle_decode(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(rle_encode(&back).to_string(), text);
    }
}

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/rle_golden.jsonl")
}

fn golden_cases() -> Vec<serde_json::Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = Vec::new();
    let fixed = [
        BinaryMask::empty(2, 2).unwrap(),
        BinaryMask::full(2, 2).unwrap(),
        BinaryMask::from_bits(2, 2, vec![true, false, false, true]).unwrap(),
        BinaryMask::full(1, 1).unwrap(),
    ];
    let random = (0..60).map(|_| {
        let (h, w) = (rng.random_range(1..=64), rng.random_range(1..=64));
        random_mask(&mut rng, h, w)
    });
    for m in fixed.into_iter().chain(random) {
        let bits: String = m.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        cases.push(serde_json::json!({
            "height": m.height(),
            "width": m.width(),
            "bits": bits,
            "rle": rle_encode(&m).to_string(),
        }));
    }
    cases
}

/// The golden file is the reference other-language codecs are checked
/// against. Set `RVOSH_BLESS=1` to regenerate it.
#[test]
fn rle_golden_file_matches_codec() {
    let expected: String = golden_cases().iter().map(|c| format!("{c}\n")).collect();
    if std::env::var_os("RVOSH_BLESS").is_some() {
        fs::write(golden_path(), &expected).unwrap();
    }
    let on_disk = fs::read_to_string(golden_path()).unwrap();
    assert_eq!(on_disk, expected);
    for line in on_disk.lines() {
        let c: serde_json::Value = serde_json::from_str(line).unwrap();
        let m = rle_decode(c["rle"].as_str().unwrap()).unwrap();
        let bits: String = m.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        assert_eq!(bits, c["bits"].as_str().unwrap());
    }
}

#[test]
fn presets_write_and_load_back() {
    for name in PRESET_NAMES {
        let dir = tempfile::tempdir().unwrap();
        let ds = preset(name).unwrap();
        let path = write_scene_dataset(&ds, dir.path()).unwrap();
        let loaded = load_manifest(&path).unwrap();
        let memory = generate_dataset(&ds).unwrap();
        assert_eq!(loaded.manifest, memory.manifest);
        assert_eq!(loaded.tasks, memory.tasks, "{name}");
        for (a, b) in loaded.videos.iter().zip(&memory.videos) {
            assert_eq!(a.preload().unwrap(), b.preload().unwrap());
        }
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            loaded.manifest.to_canonical_string()
        );
    }
}

#[test]
fn static_preset_has_ten_frames_and_late_object_starts_empty() {
    let dir = tempfile::tempdir().unwrap();
    let ds = load_manifest(&write_scene_dataset(&preset("static").unwrap(), dir.path()).unwrap()).unwrap();
    assert!(ds.videos.iter().all(|v| v.frame_count() == 10));

    let ds = generate_dataset(&preset("late-appearance").unwrap()).unwrap();
    let task = ds.tasks.iter().find(|t| t.expression_id == "red-disk").unwrap();
    let gt = task.ground_truth.as_ref().unwrap();
    let frames = gt.len();
    assert!((0..frames / 2).all(|f| gt.get(f).unwrap().is_empty()));
    assert!(!gt.get(frames - 1).unwrap().is_empty());
}

#[test]
fn scene_generation_is_byte_deterministic() {
    let mut ds = preset("two-object-conflict").unwrap();
    for e in &mut ds.scenes {
        e.scene.pixel_noise = 3;
    }
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_scene_dataset(&ds, a.path()).unwrap();
    write_scene_dataset(&ds, b.path()).unwrap();
    let files = |root: &Path| {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    };
    assert_eq!(files(a.path()), files(b.path()));
}

fn mevis_fixture(root: &Path) -> PathBuf {
    let frames = ["00000", "00001", "00002"];
    fs::create_dir_all(root.join("JPEGImages/vid1")).unwrap();
    fs::create_dir_all(root.join("Annotations/vid1")).unwrap();
    for (i, stem) in frames.iter().enumerate() {
        RgbFrame::filled(4, 6, [i as u8, 0, 0])
            .unwrap()
            .save_png(&root.join(format!("JPEGImages/vid1/{stem}.png")))
            .unwrap();
        let mut labels = vec![0u8; 24];
        labels[i] = 1;
        labels[10 + i] = 2;
        labels[20] = 3;
        write_labels(
            &root.join(format!("Annotations/vid1/{stem}.png")),
            &LabelGrid::new(4, 6, labels).unwrap(),
        )
        .unwrap();
    }
    let meta = serde_json::json!({
        "videos": {
            "vid1": {
                "frames": frames,
                "expressions": {
                    "0": {"exp": "the left fish", "obj_id": [0], "anno_id": [1]},
                    "1": {"exp": "fish swimming together", "obj_id": [0, 1], "anno_id": [1, 2]},
                    "2": {"exp": "the rock", "anno_id": [3]}
                }
            },
            "unused": {"frames": ["00000"], "expressions": {}}
        }
    });
    let path = root.join("meta_expressions.json");
    fs::write(&path, meta.to_string()).unwrap();
    path
}

#[test]
fn mevis_fixture_imports_and_loads() {
    let dir = tempfile::tempdir().unwrap();
    let meta = mevis_fixture(dir.path());
    let manifest = import_mevis_meta(&meta, &dir.path().join("Annotations"), None).unwrap();
    assert_eq!(manifest.videos.len(), 1);
    assert_eq!(manifest.expressions.len(), 3);
    assert_eq!(manifest.expressions[1].object_ids, vec![1, 2]);

    let out = dir.path().join("canonical");
    fs::create_dir(&out).unwrap();
    let path = out.join("manifest.json");
    manifest.save(&path).unwrap();
    let ds = load_manifest(&path).unwrap();
    let both = ds.tasks[1].ground_truth.as_ref().unwrap();
    for f in 0..3 {
        let m = both.get(f).unwrap();
        assert_eq!(m.area(), 2);
        assert!(m.bits()[f] && m.bits()[10 + f]);
    }
}

#[test]
fn mevis_missing_annotation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let meta = mevis_fixture(dir.path());
    let missing = dir.path().join("Annotations/vid1/00001.png");
    fs::remove_file(&missing).unwrap();
    match import_mevis_meta(&meta, &dir.path().join("Annotations"), None) {
        Err(DataError::Missing { path }) => assert_eq!(path, missing),
        other => panic!("unexpected {other:?}"),
    }
}
