//! Boundary extraction and the boundary F-measure with exact Euclidean
//! matching (squared distance transform, integer arithmetic throughout).

use std::cmp::Ordering;

use crate::types::BinaryMask;

use super::MetricsError;

/// Pixels of `m` with at least one 4-neighbour that is outside the image or
/// false in `m`.
pub fn mask_boundary(m: &BinaryMask) -> BinaryMask {
    let (h, w) = m.dims();
    BinaryMask::from_fn(h, w, |r, c| {
        m.get(r, c)
            && (r == 0
                || c == 0
                || r + 1 == h
                || c + 1 == w
                || !m.get(r - 1, c)
                || !m.get(r + 1, c)
                || !m.get(r, c - 1)
                || !m.get(r, c + 1))
    })
    .expect("same shape as input")
}

/// Squared Euclidean distance from every pixel to the nearest true pixel of
/// `features`; `None` everywhere when `features` is empty.
///
/// Two-pass exact transform: per-column nearest-feature distances, then a
/// per-row lower envelope of parabolas whose breakpoints are kept as exact
/// fractions.
pub fn squared_distance_transform(features: &BinaryMask) -> Vec<Option<u64>> {
    let (h, w) = features.dims();
    let mut vertical: Vec<Option<u64>> = vec![None; h * w];
    for c in 0..w {
        let mut last: Option<usize> = None;
        for r in 0..h {
            if features.get(r, c) {
                last = Some(r);
            }
            vertical[r * w + c] = last.map(|l| (r - l) as u64);
        }
        let mut next: Option<usize> = None;
        for r in (0..h).rev() {
            if features.get(r, c) {
                next = Some(r);
            }
            if let Some(n) = next {
                let d = (n - r) as u64;
                let slot = &mut vertical[r * w + c];
                *slot = Some(slot.map_or(d, |v| v.min(d)));
            }
        }
    }

    let mut out = vec![None; h * w];
    let mut f = vec![None; w];
    for r in 0..h {
        for c in 0..w {
            f[c] = vertical[r * w + c].map(|d| d * d);
        }
        lower_envelope(&f, &mut out[r * w..(r + 1) * w]);
    }
    out
}

#[derive(Clone, Copy)]
enum Breakpoint {
    NegInf,
    At { num: i128, den: i128 },
    PosInf,
}

impl Breakpoint {
    // den is always positive
    fn cmp_frac(&self, num: i128, den: i128) -> Ordering {
        match *self {
            Breakpoint::NegInf => Ordering::Less,
            Breakpoint::PosInf => Ordering::Greater,
            Breakpoint::At { num: n, den: d } => (n * den).cmp(&(num * d)),
        }
    }
}

fn lower_envelope(f: &[Option<u64>], out: &mut [Option<u64>]) {
    let n = f.len();
    let finite: Vec<usize> = (0..n).filter(|&q| f[q].is_some()).collect();
    if finite.is_empty() {
        out.iter_mut().for_each(|o| *o = None);
        return;
    }
    let height = |q: usize| f[q].unwrap() as i128 + (q as i128) * (q as i128);
    let mut v: Vec<usize> = Vec::with_capacity(finite.len());
    let mut z: Vec<Breakpoint> = Vec::with_capacity(finite.len() + 1);
    v.push(finite[0]);
    z.push(Breakpoint::NegInf);
    z.push(Breakpoint::PosInf);
    for &q in &finite[1..] {
        let (num, den) = loop {
            let p = *v.last().unwrap();
            let num = height(q) - height(p);
            let den = 2 * (q as i128 - p as i128);
            let k = v.len() - 1;
            // drop p when the new parabola overtakes it before p's own start
            if z[k].cmp_frac(num, den) != Ordering::Less {
                v.pop();
                z.pop();
                continue;
            }
            break (num, den);
        };
        v.push(q);
        let last = z.len() - 1;
        z[last] = Breakpoint::At { num, den };
        z.push(Breakpoint::PosInf);
    }
    let mut k = 0;
    for (c, slot) in out.iter_mut().enumerate() {
        while z[k + 1].cmp_frac(c as i128, 1) == Ordering::Less {
            k += 1;
        }
        let q = v[k];
        let dx = c.abs_diff(q) as u64;
        *slot = Some(dx * dx + f[q].unwrap());
    }
}

fn matched_fraction(from: &BinaryMask, to_dt: &[Option<u64>], tol_sq: f64) -> f64 {
    let total = from.area();
    let w = from.width();
    let hits = from
        .pixels()
        .filter(|&(r, c)| to_dt[r * w + c].is_some_and(|d| d as f64 <= tol_sq))
        .count();
    hits as f64 / total as f64
}

/// Boundary F-measure between `pred` and `gt`.
///
/// A boundary pixel counts as matched when some boundary pixel of the other
/// mask lies within Euclidean distance `tolerance`. Both boundaries empty
/// scores 1, exactly one empty scores 0.
pub fn boundary_f(pred: &BinaryMask, gt: &BinaryMask, tolerance: f64) -> Result<f64, MetricsError> {
    pred.ensure_same_dims(gt)?;
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(MetricsError::InvalidTolerance(tolerance));
    }
    let bp = mask_boundary(pred);
    let bg = mask_boundary(gt);
    match (bp.is_empty(), bg.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let tol_sq = tolerance * tolerance;
    let precision = matched_fraction(&bp, &squared_distance_transform(&bg), tol_sq);
    let recall = matched_fraction(&bg, &squared_distance_transform(&bp), tol_sq);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}
