use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvosh_core::metrics::{boundary_f, jaccard};
use rvosh_core::types::BinaryMask;

/// Foreground pixels touching the border or a background 4-neighbour.
fn oracle_boundary(m: &BinaryMask) -> Vec<(i64, i64)> {
    let (h, w) = (m.height() as i64, m.width() as i64);
    let on = |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && m.get(r as usize, c as usize);
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let edge = [(-1, 0), (1, 0), (0, -1), (0, 1)]
                .iter()
                .any(|(dr, dc)| !on(r + dr, c + dc));
            if on(r, c) && edge {
                out.push((r, c));
            }
        }
    }
    out
}

fn oracle_f(pred: &BinaryMask, gt: &BinaryMask, tol: f64) -> f64 {
    let bp = oracle_boundary(pred);
    let bg = oracle_boundary(gt);
    match (bp.is_empty(), bg.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let matched = |from: &[(i64, i64)], to: &[(i64, i64)]| {
        from.iter()
            .filter(|(r, c)| {
                to.iter().any(|(r2, c2)| {
                    let d = (((r - r2).pow(2) + (c - c2).pow(2)) as f64).sqrt();
                    d <= tol
                })
            })
            .count() as f64
            / from.len() as f64
    };
    let p = matched(&bp, &bg);
    let r = matched(&bg, &bp);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn oracle_j(pred: &BinaryMask, gt: &BinaryMask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in pred.bits().iter().zip(gt.bits()) {
        inter += usize::from(*a && *b);
        union += usize::from(*a || *b);
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn blobby(rng: &mut ChaCha8Rng, h: usize, w: usize) -> BinaryMask {
    match rng.random_range(0..3) {
        0 => {
            let p: f64 = rng.random();
            BinaryMask::from_fn(h, w, |_, _| rng.random_bool(p)).unwrap()
        }
        1 => BinaryMask::empty(h, w).unwrap(),
        _ => {
            let (r0, c0) = (rng.random_range(0..h), rng.random_range(0..w));
            let (r1, c1) = (rng.random_range(r0..h), rng.random_range(c0..w));
            BinaryMask::from_fn(h, w, |r, c| (r0..=r1).contains(&r) && (c0..=c1).contains(&c)).unwrap()
        }
    }
}

#[test]
fn seeded_pairs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..150 {
        let (h, w) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let a = blobby(&mut rng, h, w);
        let b = blobby(&mut rng, h, w);
        let tol = [0.0, 1.0, 1.5, 2.0, 3.7][rng.random_range(0..5)];
        assert_eq!(jaccard(&a, &b).unwrap(), oracle_j(&a, &b));
        let got = boundary_f(&a, &b, tol).unwrap();
        let want = oracle_f(&a, &b, tol);
        assert!((got - want).abs() <= 1e-9, "{got} vs {want} ({h}x{w}, tol {tol})");
    }
}

#[test]
fn shifted_square_example() {
    let sq = |r0: usize, c0: usize| {
        BinaryMask::from_fn(10, 10, |r, c| (r0..r0 + 2).contains(&r) && (c0..c0 + 2).contains(&c)).unwrap()
    };
    let (a, b) = (sq(4, 4), sq(4, 5));
    assert_eq!(boundary_f(&a, &b, 1.0).unwrap(), oracle_f(&a, &b, 1.0));
    assert_eq!(boundary_f(&a, &b, 1.0).unwrap(), 1.0);
    assert_eq!(boundary_f(&a, &sq(4, 7), 1.0).unwrap(), oracle_f(&a, &sq(4, 7), 1.0));
}

fn pair(max: usize) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1..=max, 1..=max).prop_flat_map(|(h, w)| {
        let bits = || proptest::collection::vec(any::<bool>(), h * w);
        (bits(), bits()).prop_map(move |(a, b)| {
            (
                BinaryMask::from_bits(h, w, a).unwrap(),
                BinaryMask::from_bits(h, w, b).unwrap(),
            )
        })
    })
}

fn pad(m: &BinaryMask, dr: usize, dc: usize, margin: usize) -> BinaryMask {
    let (h, w) = m.dims();
    BinaryMask::from_fn(h + 2 * margin, w + 2 * margin, |r, c| {
        r >= dr && c >= dc && r - dr < h && c - dc < w && m.get(r - dr, c - dc)
    })
    .unwrap()
}

proptest! {
    #[test]
    fn metrics_are_symmetric((a, b) in pair(12), tol in 0.0f64..4.0) {
        prop_assert_eq!(jaccard(&a, &b).unwrap(), jaccard(&b, &a).unwrap());
        prop_assert_eq!(boundary_f(&a, &b, tol).unwrap(), boundary_f(&b, &a, tol).unwrap());
    }

    #[test]
    fn interior_translation_is_invisible((a, b) in pair(8), dr in 0usize..4, dc in 0usize..4, tol in 0.0f64..3.0) {
        // both embedded with a margin, so neither touches the border
        let (a0, b0) = (pad(&a, 2, 2, 4), pad(&b, 2, 2, 4));
        let (a1, b1) = (pad(&a, 2 + dr, 2 + dc, 4), pad(&b, 2 + dr, 2 + dc, 4));
        prop_assert_eq!(jaccard(&a0, &b0).unwrap(), jaccard(&a1, &b1).unwrap());
        prop_assert_eq!(boundary_f(&a0, &b0, tol).unwrap(), boundary_f(&a1, &b1, tol).unwrap());
    }

    #[test]
    fn boundary_f_grows_with_tolerance((a, b) in pair(12), t0 in 0.0f64..3.0, dt in 0.0f64..3.0) {
        prop_assert!(boundary_f(&a, &b, t0).unwrap() <= boundary_f(&a, &b, t0 + dt).unwrap());
    }
}
