mod common;

use common::{alone, clean_segment, random_segment};
use cpforge::adapt::{AdaptState, ARMS};
use cpforge::content_space::{AttributeRanges, ElementKind, SegmentDescriptor, Tile, TileGrid, ROWS};
use cpforge::learn::{mixed_distance, model_input, ErrorRates, Forest, INPUT_WIDTH};
use cpforge::metrics::{density, grid_leniency, linearity, segment_leniency};
use cpforge::oracle::{annotate, is_playable, OracleConfig, Quality, Reason};
use cpforge::rules::{check_conflicts, filter_pool};
use cpforge::seed;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn shuffled(s: &SegmentDescriptor, k: u64) -> SegmentDescriptor {
    let mut rng = seed::rng(k);
    let mut t = s.clone();
    t.gaps.shuffle(&mut rng);
    t.hills.shuffle(&mut rng);
    t.cannons.shuffle(&mut rng);
    t.tubes.shuffle(&mut rng);
    t.boxes.shuffle(&mut rng);
    t.enemies.shuffle(&mut rng);
    t.coins.shuffle(&mut rng);
    t
}

/// Conflicts keyed by the elements themselves rather than their list positions.
fn conflict_multiset(s: &SegmentDescriptor) -> Vec<(String, String, String)> {
    let els = s.elements();
    let find = |r| format!("{:?}", els.iter().find(|(x, _)| *x == r).expect("ref exists").1);
    let mut v: Vec<_> = check_conflicts(s)
        .conflicts
        .iter()
        .map(|c| {
            let (a, b) = (find(c.a), find(c.b));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            (a, b, c.kind.to_string())
        })
        .collect();
    v.sort();
    v
}

fn standing_by_scan(g: &TileGrid) -> usize {
    let mut n = 0;
    for (c, r, t) in g.cells() {
        if t.is_solid() && r >= 2 && !g.is_solid(c, r - 1) && !g.is_solid(c, r - 2) {
            n += 1;
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn samples_are_canonical_and_valid(s in any::<u64>()) {
        let seg = random_segment(s);
        prop_assert!(seg.is_canonical());
        prop_assert_eq!(seg.canonicalize().unwrap(), seg.clone());
        seg.validate().unwrap();
    }

    #[test]
    fn encode_decode_bijection(s in any::<u64>()) {
        let seg = random_segment(s);
        let v = seg.to_feature_vector();
        prop_assert_eq!(v.decode().unwrap(), seg);
        prop_assert_eq!(v.decode().unwrap().to_feature_vector(), v);
    }

    #[test]
    fn segment_text_round_trip(s in any::<u64>()) {
        let seg = random_segment(s);
        let text = seg.to_text();
        let back = SegmentDescriptor::parse_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn clean_segments_render_without_overlap(s in any::<u64>()) {
        let seg = clean_segment(s);
        let base = SegmentDescriptor::empty(seg.platform_height).render_tiles().unwrap();
        let full = seg.render_tiles().unwrap();
        prop_assert_eq!(full.width(), 20);
        prop_assert_eq!(full.height(), 15);
        // each element changes its own cells and the full render is the
        // overlay of the solo renders; overlapping hills are the one
        // permitted sharing
        let mut owner: Vec<Option<ElementKind>> = vec![None; 20 * ROWS];
        let mut expect = base.clone();
        for (_, e) in seg.elements() {
            let solo = alone(&seg, &e).render_tiles().unwrap();
            for (c, r, t) in solo.cells() {
                if t != base.get(c, r) {
                    let prev = owner[r * 20 + c].replace(e.kind());
                    let hills = prev == Some(ElementKind::Hill) && e.kind() == ElementKind::Hill;
                    prop_assert!(prev.is_none() || hills, "cell ({}, {}) drawn twice", c, r);
                    expect.set(c, r, t);
                }
            }
        }
        prop_assert_eq!(full, expect);
    }

    #[test]
    fn conflicts_ignore_element_order(s in any::<u64>(), k in any::<u64>()) {
        let seg = random_segment(s);
        let t = shuffled(&seg, k);
        prop_assert_eq!(conflict_multiset(&t), conflict_multiset(&seg));
        prop_assert_eq!(check_conflicts(&t.canonicalize().unwrap()), check_conflicts(&seg));
    }

    #[test]
    fn filter_pool_is_idempotent(s in any::<u64>()) {
        let mut pool: Vec<SegmentDescriptor> = (0..200).map(|i| random_segment(seed::derive(s, i))).collect();
        pool.push(clean_segment(s));
        let once = filter_pool(&pool);
        prop_assert!(!once.is_empty());
        prop_assert_eq!(filter_pool(&once), once.clone());
        prop_assert!(once.iter().all(|x| check_conflicts(x).is_clean()));
    }

    #[test]
    fn annotation_is_deterministic_and_order_free(s in any::<u64>(), k in any::<u64>()) {
        let cfg = OracleConfig::default();
        let seg = clean_segment(s);
        let a = annotate(&seg, &cfg).unwrap();
        prop_assert_eq!(annotate(&seg, &cfg).unwrap(), a.clone());
        prop_assert_eq!(annotate(&shuffled(&seg, k), &cfg).unwrap(), a.clone());
        // unplayable overrides everything and agrees with the playability check
        prop_assert_eq!(a.has(Reason::Unplayable), !is_playable(&seg, &cfg.jump));
        if a.has(Reason::Unplayable) {
            prop_assert_eq!(a.quality(), Quality::Low);
        }
        prop_assert_eq!(a.quality() == Quality::High, a.reasons().is_empty());
    }

    #[test]
    fn leniency_agrees_across_representations(s in any::<u64>()) {
        let seg = clean_segment(s);
        let text = seg.render_tiles().unwrap().to_tile_file();
        let grid = TileGrid::parse_tile_file(&text).unwrap();
        prop_assert_eq!(grid_leniency(&grid), segment_leniency(&seg));
        prop_assert_eq!(density(&grid).0, standing_by_scan(&grid));
    }

    #[test]
    fn mixed_distance_axioms(a in any::<u64>(), b in any::<u64>()) {
        let r = AttributeRanges::default();
        let (x, y) = (random_segment(a).to_feature_vector(), random_segment(b).to_feature_vector());
        let d = mixed_distance(&x, &y, &r).unwrap();
        prop_assert_eq!(mixed_distance(&x, &x, &r).unwrap(), 0.0);
        prop_assert_eq!(d, mixed_distance(&y, &x, &r).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
        if x != y {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn linearity_is_bounded(heights in prop::collection::vec(0usize..=ROWS, 1..300)) {
        let mut g = TileGrid::new(heights.len());
        for (c, &h) in heights.iter().enumerate() {
            for r in ROWS - h..ROWS {
                g.set(c, r, Tile::Ground);
            }
        }
        if heights.iter().all(|&h| h == 0) {
            prop_assert!(linearity(&g).is_err());
        } else {
            let l = linearity(&g).unwrap();
            prop_assert!((0.0..=1.0).contains(&l));
        }
        prop_assert_eq!(density(&g).0, standing_by_scan(&g));
    }

    #[test]
    fn hter_matches_recount(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..400)) {
        let q = |b: bool| if b { Quality::High } else { Quality::Low };
        let p: Vec<(Quality, Quality)> = pairs.iter().map(|&(a, b)| (q(a), q(b))).collect();
        let rates = ErrorRates::from_pairs(&p);
        let mut m = [[0usize; 2]; 2];
        for &(t, pr) in &pairs {
            m[t as usize][pr as usize] += 1;
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let t1 = ratio(m[1][0], m[1][0] + m[1][1]);
        let t2 = ratio(m[0][1], m[0][0] + m[0][1]);
        prop_assert_eq!(rates.type_i, t1);
        prop_assert_eq!(rates.type_ii, t2);
        prop_assert_eq!(rates.hter(), (t1 + t2) / 2.0);
        prop_assert_eq!(rates.accuracy, (m[0][0] + m[1][1]) as f64 / pairs.len() as f64);
    }

    #[test]
    fn bandit_bookkeeping(theta in 0.05f64..0.95, plays in prop::collection::vec((1usize..=ARMS, any::<bool>()), 0..300)) {
        let mut s = AdaptState::new(theta).unwrap();
        for &(arm, r) in &plays {
            s.update(arm, r).unwrap();
            let total: f64 = (0..ARMS).map(|i| s.alpha[i] + s.beta[i] - 2.0).sum();
            prop_assert_eq!(total, s.t as f64);
        }
        prop_assert_eq!(s.t as usize, plays.len());
    }

    #[test]
    fn bandit_selection_respects_eligibility(s in any::<u64>(), plays in prop::collection::vec((1usize..=ARMS, any::<bool>()), 1..50)) {
        let mut st = AdaptState::new(0.8).unwrap();
        let mut rng = seed::rng(s);
        for &(arm, r) in &plays {
            st.update(arm, r).unwrap();
            let pick = st.select(&mut rng);
            prop_assert!(st.eligible().contains(&pick));
            if r {
                prop_assert!(pick.abs_diff(arm) <= 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn forest_ignores_tree_order(k in any::<u64>()) {
        let f = common::forest();
        let mut trees = f.trees.clone();
        trees.shuffle(&mut seed::rng(k));
        let g = Forest { inputs: f.inputs, trees };
        let r = AttributeRanges::default();
        let mut rng = seed::rng(k ^ 1);
        for i in 0..100 {
            let x = model_input(&random_segment(seed::derive(k, i)).to_feature_vector(), &r);
            prop_assert_eq!(f.predict(&x), g.predict(&x));
            let noise: Vec<f64> = (0..INPUT_WIDTH).map(|_| rng.random_range(-1.0..=1.0)).collect();
            prop_assert_eq!(f.predict(&noise), g.predict(&noise));
        }
    }
}

