use rand::seq::SliceRandom;

use super::distance::model_input;
use super::forest::Forest;
use crate::content_space::{slot_description, AttributeRanges, FeatureVector, FEATURE_COUNT};
use crate::oracle::Quality;
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct Importance {
    /// 1-based slot id.
    pub feature_id: usize,
    pub importance: f64,
}

fn accuracy(forest: &Forest, rows: &[Vec<f64>], labels: &[Quality]) -> f64 {
    let ok = rows.iter().zip(labels).filter(|(x, y)| forest.predict(x).label == **y).count();
    ok as f64 / rows.len().max(1) as f64
}

/// Mean accuracy drop when one slot is shuffled across the validation set,
/// sorted by decreasing importance (ties by slot id).
pub fn permutation_importance(
    forest: &Forest,
    validation: &[(FeatureVector, Quality)],
    ranges: &AttributeRanges,
    permutations: usize,
    rng_seed: u64,
) -> Vec<Importance> {
    let labels: Vec<Quality> = validation.iter().map(|v| v.1).collect();
    let rows: Vec<Vec<f64>> = validation.iter().map(|v| model_input(&v.0, ranges)).collect();
    let base = accuracy(forest, &rows, &labels);
    let mut out: Vec<Importance> = (0..FEATURE_COUNT)
        .map(|slot| {
            let mut rng = seed::rng(seed::derive(rng_seed, slot as u64));
            let column: Vec<f64> = validation.iter().map(|v| v.0.values[slot]).collect();
            let mut drop = 0.0;
            for _ in 0..permutations {
                let mut shuffled = column.clone();
                shuffled.shuffle(&mut rng);
                let permuted: Vec<Vec<f64>> = validation
                    .iter()
                    .zip(&shuffled)
                    .map(|((fv, _), &x)| {
                        let mut v = fv.clone();
                        v.values[slot] = x;
                        model_input(&v, ranges)
                    })
                    .collect();
                drop += base - accuracy(forest, &permuted, &labels);
            }
            Importance { feature_id: slot + 1, importance: drop / permutations.max(1) as f64 }
        })
        .collect();
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.feature_id.cmp(&b.feature_id)));
    out
}

pub const IMPORTANCE_HEADER: &str = "rank,feature_id,description,importance";

/// Ranked CSV of the first `top` entries.
pub fn importance_csv(ranked: &[Importance], top: usize) -> String {
    let mut s = format!("{IMPORTANCE_HEADER}\n");
    for (r, imp) in ranked.iter().take(top).enumerate() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r + 1,
            imp.feature_id,
            slot_description(imp.feature_id - 1),
            imp.importance
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_space::*;
    use crate::learn::{train_forest, ForestParams};
    use rand::Rng;

    #[test]
    fn driving_slot_ranks_first() {
        // label depends on the x of the first gap only (slot id 3)
        let r = AttributeRanges::default();
        let mut rng = seed::rng(7);
        let mut data = Vec::new();
        for _ in 0..600 {
            let mut s = SegmentDescriptor::empty(rng.random_range(1..=7));
            let x = rng.random_range(1..=15);
            s.gaps.push(Gap { x, width: rng.random_range(1..=3), kind: GapKind::Plain });
            for _ in 0..rng.random_range(0..=3) {
                s.enemies.push(Enemy { x: rng.random_range(0..20), y: 5, kind: EnemyKind::Goomba });
            }
            s.canonicalize_in_place();
            let q = if x >= 8 { Quality::High } else { Quality::Low };
            data.push((s.to_feature_vector(), q));
        }
        let rows: Vec<Vec<f64>> = data[..400].iter().map(|d| model_input(&d.0, &r)).collect();
        let labels: Vec<Quality> = data[..400].iter().map(|d| d.1).collect();
        let f = train_forest(&rows, &labels, &ForestParams::default(), 2).unwrap();
        let ranked = permutation_importance(&f, &data[400..], &r, 10, 5);
        assert_eq!(ranked[0].feature_id, 3);
        assert_eq!(ranked.len(), FEATURE_COUNT);
        // the first coin run never appears, so its slots are constant
        let coin_x = ranked.iter().find(|i| i.feature_id == 81).unwrap();
        assert_eq!(coin_x.importance, 0.0);
        let csv = importance_csv(&ranked, 30);
        assert_eq!(csv.lines().count(), 31);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,3,x of the first gap,"));
    }
}
