//! Reference oracles for the acceptance suite.
//!
//! Everything here is written for obviousness rather than speed: metrics
//! are computed by direct pixel counting and all-pairs distances, and the
//! sampling oracle is the closed-form index formula. None of it shares
//! code with the implementations it checks.

use std::path::Path;

use rvosh_core::types::BinaryMask;
use serde::Deserialize;

/// Intersection over union by counting pixels; two empty masks score 1.
pub fn jaccard_oracle(pred: &BinaryMask, gt: &BinaryMask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for r in 0..gt.height() {
        for c in 0..gt.width() {
            let (a, b) = (pred.get(r, c), gt.get(r, c));
            inter += usize::from(a && b);
            union += usize::from(a || b);
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Foreground pixels with a background (or out-of-frame) 4-neighbour.
pub fn boundary_oracle(m: &BinaryMask) -> Vec<(i64, i64)> {
    let (h, w) = (m.height() as i64, m.width() as i64);
    let on = |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && m.get(r as usize, c as usize);
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if on(r, c)
                && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                    .iter()
                    .any(|(dr, dc)| !on(r + dr, c + dc))
            {
                out.push((r, c));
            }
        }
    }
    out
}

/// Boundary F-measure by checking every boundary pixel against every
/// boundary pixel of the other mask.
pub fn boundary_f_oracle(pred: &BinaryMask, gt: &BinaryMask, tolerance: f64) -> f64 {
    let bp = boundary_oracle(pred);
    let bg = boundary_oracle(gt);
    match (bp.is_empty(), bg.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let matched_fraction = |from: &[(i64, i64)], to: &[(i64, i64)]| {
        let hits = from
            .iter()
            .filter(|(r, c)| {
                to.iter()
                    .any(|(r2, c2)| ((((r - r2).pow(2) + (c - c2).pow(2)) as f64).sqrt()) <= tolerance)
            })
            .count();
        hits as f64 / from.len() as f64
    };
    let precision = matched_fraction(&bp, &bg);
    let recall = matched_fraction(&bg, &bp);
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Evenly spaced indices `floor(k (I-1) / (T-1))`, clamped to `I` frames.
pub fn uniform_oracle(total: usize, requested: usize) -> Vec<usize> {
    let t = requested.min(total);
    if t == 1 {
        return vec![0];
    }
    (0..t).map(|k| k * (total - 1) / (t - 1)).collect()
}

/// One row of a published results table that prints J, F and J&F.
#[derive(Debug, Clone, Deserialize)]
pub struct PublishedRow {
    pub table: u32,
    pub method: String,
    pub backbone: String,
    pub frames: String,
    pub benchmark: String,
    pub jf: f64,
    pub j: f64,
    pub f: f64,
}

impl PublishedRow {
    pub fn label(&self) -> String {
        format!(
            "table {} {} {} frames={} {}",
            self.table, self.method, self.backbone, self.frames, self.benchmark
        )
    }

    pub fn arithmetic(&self) -> f64 {
        (self.j + self.f) / 2.0
    }

    pub fn geometric(&self) -> f64 {
        (self.j * self.f).sqrt()
    }
}

pub fn load_published_rows(path: &Path) -> csv::Result<Vec<PublishedRow>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

/// Whether `combined` reproduces the printed J&F within `tolerance` points.
/// A small epsilon absorbs binary representation error of one-decimal values.
pub fn reproduces(printed: f64, combined: f64, tolerance: f64) -> bool {
    (printed - combined).abs() <= tolerance + 1e-9
}
