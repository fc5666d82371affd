//! Binary morphology on [`BinaryMask`]: square (Chebyshev) dilation and
//! erosion, and 4-connected component labelling.

use crate::types::BinaryMask;

/// Dilates by a Chebyshev ball of `radius`, i.e. a `(2r+1)x(2r+1)` square.
pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    window_filter(mask, radius, |window_any, _| window_any)
}

/// Erodes by a Chebyshev ball of `radius`. Windows are clipped at the image
/// border, so out-of-image pixels never erode.
pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    window_filter(mask, radius, |_, window_all| window_all)
}

/// Positive radius dilates, negative erodes by `|radius|`.
pub fn dilate_signed(mask: &BinaryMask, radius: i32) -> BinaryMask {
    let r = radius.unsigned_abs() as usize;
    if radius >= 0 {
        dilate(mask, r)
    } else {
        erode(mask, r)
    }
}

// Separable square filter: a horizontal pass then a vertical pass, each
// tracking "any true" and "all true" over the clipped window.
fn window_filter(mask: &BinaryMask, radius: usize, pick: impl Fn(bool, bool) -> bool) -> BinaryMask {
    let (h, w) = mask.dims();
    let mut any_row = vec![false; h * w];
    let mut all_row = vec![false; h * w];
    for r in 0..h {
        // prefix counts of true pixels in the row
        let mut prefix = vec![0usize; w + 1];
        for c in 0..w {
            prefix[c + 1] = prefix[c] + usize::from(mask.get(r, c));
        }
        for c in 0..w {
            let lo = c.saturating_sub(radius);
            let hi = (c + radius).min(w - 1);
            let n = prefix[hi + 1] - prefix[lo];
            any_row[r * w + c] = n > 0;
            all_row[r * w + c] = n == hi + 1 - lo;
        }
    }
    let mut any_prefix = vec![0usize; h + 1];
    let mut all_prefix = vec![0usize; h + 1];
    let mut result = vec![false; h * w];
    for c in 0..w {
        for r in 0..h {
            any_prefix[r + 1] = any_prefix[r] + usize::from(any_row[r * w + c]);
            all_prefix[r + 1] = all_prefix[r] + usize::from(all_row[r * w + c]);
        }
        for r in 0..h {
            let lo = r.saturating_sub(radius);
            let hi = (r + radius).min(h - 1);
            let any = any_prefix[hi + 1] - any_prefix[lo] > 0;
            let all = all_prefix[hi + 1] - all_prefix[lo] == hi + 1 - lo;
            result[r * w + c] = pick(any, all);
        }
    }
    BinaryMask::from_bits(h, w, result).expect("same shape as input")
}

/// Labels 4-connected components of the true pixels.
///
/// Returns one pixel-index list per component, ordered by the row-major
/// position of each component's first pixel.
pub fn connected_components(mask: &BinaryMask) -> Vec<Vec<usize>> {
    let (h, w) = mask.dims();
    let bits = mask.bits();
    let mut seen = vec![false; h * w];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..h * w {
        if !bits[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (r, c) = (i / w, i % w);
            let mut visit = |j: usize| {
                if bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}
