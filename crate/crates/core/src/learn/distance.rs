use crate::content_space::*;
use crate::error::{Error, Result};

/// Checks that every nominal slot holds the sentinel or a valid category index.
pub(crate) fn check_kinds(v: &FeatureVector) -> Result<()> {
    for (i, s) in slots().iter().enumerate() {
        if s.kind == SlotKind::Nominal {
            let x = v.values[i];
            let arity = nominal_arity(s.attr) as f64;
            if x != ABSENT && (x.fract() != 0.0 || x < 0.0 || x >= arity) {
                return Err(Error::KindMismatch(i + 1));
            }
        }
    }
    Ok(())
}

/// Dissimilarity of a single slot; both values already known to be valid.
pub(crate) fn slot_distance(i: usize, a: f64, b: f64, ranges: &AttributeRanges) -> f64 {
    match (a == ABSENT, b == ABSENT) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => match slot_kind(i) {
            SlotKind::Nominal => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            SlotKind::Ordinal => ((a - b).abs() / slot_range(i, ranges)).min(1.0),
        },
    }
}

/// Mean per-slot dissimilarity over all 85 slots, in [0, 1].
pub fn mixed_distance(a: &FeatureVector, b: &FeatureVector, ranges: &AttributeRanges) -> Result<f64> {
    check_kinds(a)?;
    check_kinds(b)?;
    let total: f64 = (0..FEATURE_COUNT)
        .map(|i| slot_distance(i, a.values[i], b.values[i], ranges))
        .sum();
    Ok(total / FEATURE_COUNT as f64)
}

/// Width of the forest input: ordinal slots as scaled values, nominal slots one-hot.
pub const INPUT_WIDTH: usize = 110;

/// Forest input columns for a feature vector. Ordinal values are scaled to
/// [0, 1] by their bounds with absent slots at -1; absent nominal slots
/// leave their indicators at 0.
pub fn model_input(v: &FeatureVector, ranges: &AttributeRanges) -> Vec<f64> {
    let mut out = Vec::with_capacity(INPUT_WIDTH);
    for (i, s) in slots().iter().enumerate() {
        let x = v.values[i];
        match s.kind {
            SlotKind::Ordinal => {
                if x == ABSENT {
                    out.push(-1.0);
                } else {
                    let (lo, _) = slot_bounds(i, ranges);
                    out.push((x - lo) / slot_range(i, ranges));
                }
            }
            SlotKind::Nominal => {
                let arity = nominal_arity(s.attr);
                for k in 0..arity {
                    out.push(if x == k as f64 { 1.0 } else { 0.0 });
                }
            }
        }
    }
    debug_assert_eq!(out.len(), INPUT_WIDTH);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> FeatureVector {
        sample_segment(seed, &ElementCaps::MAX, &AttributeRanges::default()).to_feature_vector()
    }

    #[test]
    fn identity_and_symmetry() {
        let r = AttributeRanges::default();
        for i in 0..1000 {
            let a = sample(i);
            let b = sample(i + 5000);
            assert_eq!(mixed_distance(&a, &a, &r).unwrap(), 0.0);
            let d = mixed_distance(&a, &b, &r).unwrap();
            assert_eq!(d, mixed_distance(&b, &a, &r).unwrap());
            assert!((0.0..=1.0).contains(&d));
        }
    }

    #[test]
    fn one_nominal_slot_differs() {
        let mut s = SegmentDescriptor::empty(3);
        s.enemies.push(Enemy { x: 4, y: 11, kind: EnemyKind::Goomba });
        let a = s.to_feature_vector();
        s.enemies[0].kind = EnemyKind::Spiky;
        let b = s.to_feature_vector();
        let d = mixed_distance(&a, &b, &AttributeRanges::default()).unwrap();
        assert!((d - 1.0 / 85.0).abs() < 1e-15);
    }

    #[test]
    fn sentinel_against_value_is_maximal() {
        let mut s = SegmentDescriptor::empty(3);
        let a = s.to_feature_vector();
        s.gaps.push(Gap { x: 5, width: 2, kind: GapKind::Plain });
        let b = s.to_feature_vector();
        // count slot differs by 1/3 of its range, three element slots are maximal
        let d = mixed_distance(&a, &b, &AttributeRanges::default()).unwrap();
        assert!((d - (1.0 / 3.0 + 3.0) / 85.0).abs() < 1e-15);
    }

    #[test]
    fn bad_nominal_rejected() {
        let mut s = SegmentDescriptor::empty(3);
        s.gaps.push(Gap { x: 5, width: 2, kind: GapKind::Plain });
        let mut a = s.to_feature_vector();
        a.values[4] = 7.0;
        let b = s.to_feature_vector();
        assert!(matches!(
            mixed_distance(&a, &b, &AttributeRanges::default()),
            Err(Error::KindMismatch(5))
        ));
    }

    #[test]
    fn input_layout() {
        let r = AttributeRanges::default();
        let x = model_input(&SegmentDescriptor::empty(4).to_feature_vector(), &r);
        assert_eq!(x.len(), INPUT_WIDTH);
        assert_eq!(x[0], 0.5);
        let x = model_input(&sample(3), &r);
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
