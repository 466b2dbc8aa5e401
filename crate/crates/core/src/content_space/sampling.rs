use rand::Rng;
use serde::{Deserialize, Serialize};

use super::elements::*;
use crate::seed;

/// Inclusive attribute ranges for sampling; also the normalization ranges
/// of the mixed distance and the forest inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeRanges {
    pub platform_height: (i32, i32),
    pub gap_width: (i32, i32),
    pub hill_width: (i32, i32),
    pub hill_height: (i32, i32),
    /// Tube and cannon barrel height.
    pub stack_height: (i32, i32),
    /// Tube and cannon pedestal (their `y`).
    pub pedestal: (i32, i32),
    /// `w_before` / `w_after`.
    pub margin: (i32, i32),
    pub box_width: (i32, i32),
    pub coin_width: (i32, i32),
    /// Tiles above the platform surface for boxes, coins and enemies.
    pub elevation: (i32, i32),
}

impl Default for AttributeRanges {
    fn default() -> Self {
        AttributeRanges {
            platform_height: (1, 7),
            gap_width: (1, 5),
            hill_width: (2, 8),
            hill_height: (1, 4),
            stack_height: (1, 4),
            pedestal: (0, 2),
            margin: (0, 4),
            box_width: (1, 4),
            coin_width: (1, 4),
            elevation: (0, 4),
        }
    }
}

pub(crate) fn pick<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (i32, i32)) -> i32 {
    rng.random_range(lo..=hi)
}

pub(crate) fn pick_nominal<T: Nominal, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::ALL[rng.random_range(0..T::ALL.len())]
}

/// Row of an object `elevation` tiles above the platform whose first solid row is `ground`.
pub(crate) fn row_at_elevation(ground: i32, elevation: i32) -> i32 {
    ground - 1 - elevation
}

/// Simple random sample of the tailored content space: each count uniform over
/// `0..=cap`, each attribute uniform over its range. Output is canonical.
pub fn sample_segment(rng_seed: u64, caps: &ElementCaps, ranges: &AttributeRanges) -> SegmentDescriptor {
    let mut rng = seed::rng(rng_seed);
    sample_with(&mut rng, caps, ranges)
}

pub fn sample_with<R: Rng + ?Sized>(
    rng: &mut R,
    caps: &ElementCaps,
    r: &AttributeRanges,
) -> SegmentDescriptor {
    debug_assert!(caps.within(&ElementCaps::MAX));
    let mut s = SegmentDescriptor::empty(pick(rng, r.platform_height));
    let g = s.ground_row();
    let n = |rng: &mut R, cap: usize| rng.random_range(0..=cap);

    let count = n(rng, caps.gaps);
    for _ in 0..count {
        let width = pick(rng, r.gap_width);
        let x = rng.random_range(0..=SEGMENT_WIDTH - width);
        s.gaps.push(Gap { x, width, kind: pick_nominal(rng) });
    }
    let count = n(rng, caps.hills);
    for _ in 0..count {
        let width = pick(rng, r.hill_width);
        let height = pick(rng, r.hill_height);
        let x = rng.random_range(0..=SEGMENT_WIDTH - width);
        s.hills.push(Hill { x, width, height });
    }
    let count = n(rng, caps.cannons);
    for _ in 0..count {
        let y = pick(rng, r.pedestal);
        let height = pick(rng, r.stack_height);
        let w_before = pick(rng, r.margin);
        let w_after = pick(rng, r.margin);
        let x = rng.random_range(w_before..=SEGMENT_WIDTH - CANNON_WIDTH - w_after);
        s.cannons.push(Cannon { x, y, height, w_before, w_after });
    }
    let count = n(rng, caps.tubes);
    for _ in 0..count {
        let y = pick(rng, r.pedestal);
        let height = pick(rng, r.stack_height);
        let w_before = pick(rng, r.margin);
        let w_after = pick(rng, r.margin);
        let x = rng.random_range(w_before..=SEGMENT_WIDTH - TUBE_WIDTH - w_after);
        s.tubes.push(Tube { x, y, height, w_before, w_after, kind: pick_nominal(rng) });
    }
    let count = n(rng, caps.boxes);
    for _ in 0..count {
        let width = pick(rng, r.box_width);
        let x = rng.random_range(0..=SEGMENT_WIDTH - width);
        let y = row_at_elevation(g, pick(rng, r.elevation));
        s.boxes.push(BoxRun { x, y, width, kind: pick_nominal(rng) });
    }
    let count = n(rng, caps.enemies);
    for _ in 0..count {
        let x = rng.random_range(0..SEGMENT_WIDTH);
        let y = row_at_elevation(g, pick(rng, r.elevation));
        s.enemies.push(Enemy { x, y, kind: pick_nominal(rng) });
    }
    let count = n(rng, caps.coins);
    for _ in 0..count {
        let width = pick(rng, r.coin_width);
        let x = rng.random_range(0..=SEGMENT_WIDTH - width);
        let y = row_at_elevation(g, pick(rng, r.elevation));
        s.coins.push(CoinRun { x, y, width });
    }
    s.canonicalize_in_place();
    s
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn counts_within_caps_and_valid() {
        let r = AttributeRanges::default();
        for seed in 0..2000 {
            let s = sample_segment(seed, &ElementCaps::MAX, &r);
            assert!(s.counts().within(&ElementCaps::MAX));
            s.validate().unwrap();
            assert!(s.is_canonical());
        }
    }

    #[test]
    fn same_seed_same_segment() {
        let r = AttributeRanges::default();
        assert_eq!(
            sample_segment(42, &ElementCaps::MAX, &r),
            sample_segment(42, &ElementCaps::MAX, &r)
        );
    }

    #[test]
    fn reduced_caps_respected() {
        let caps = ElementCaps { gaps: 0, hills: 1, cannons: 0, tubes: 1, boxes: 0, enemies: 2, coins: 0 };
        let r = AttributeRanges::default();
        for seed in 0..500 {
            assert!(sample_segment(seed, &caps, &r).counts().within(&caps));
        }
    }

    #[test]
    fn gap_count_uniform_chi_square() {
        let r = AttributeRanges::default();
        let mut hist = [0usize; 4];
        let n = 10_000;
        for seed in 0..n {
            hist[sample_segment(seed, &ElementCaps::MAX, &r).gaps.len()] += 1;
        }
        let expected = n as f64 / 4.0;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // chi-square with 3 dof: P(X > 11.345) = 0.01
        assert!(chi2 < 11.345, "chi2 = {chi2}, hist = {hist:?}");
    }

    #[test]
    fn feature_vectors_rarely_collide() {
        let r = AttributeRanges::default();
        let keys: HashSet<_> = (0..10_000)
            .map(|seed| sample_segment(seed, &ElementCaps::MAX, &r).to_feature_vector().key())
            .collect();
        assert!(keys.len() >= 9_990, "{} distinct", keys.len());
    }
}
