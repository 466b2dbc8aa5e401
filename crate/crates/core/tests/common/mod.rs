#![allow(dead_code)]

use std::sync::OnceLock;

use cpforge::content_space::{sample_segment, AttributeRanges, Element, ElementCaps, SegmentDescriptor};
use cpforge::dataset;
use cpforge::generator::{Generator, GeneratorConfig};
use cpforge::learn::{model_input, train_forest, Forest, ForestParams};
use cpforge::oracle::{OracleConfig, Quality};
use cpforge::{rules, seed};

pub fn random_segment(s: u64) -> SegmentDescriptor {
    sample_segment(s, &ElementCaps::MAX, &AttributeRanges::default())
}

/// First rule-clean sample in the stream of `s`.
pub fn clean_segment(s: u64) -> SegmentDescriptor {
    (0..)
        .map(|i| random_segment(seed::derive(s, i)))
        .find(rules::is_clean)
        .expect("clean segments exist")
}

/// A copy of `seg` holding only `e`.
pub fn alone(seg: &SegmentDescriptor, e: &Element) -> SegmentDescriptor {
    let mut s = SegmentDescriptor::empty(seg.platform_height);
    match *e {
        Element::Gap(x) => s.gaps.push(x),
        Element::Hill(x) => s.hills.push(x),
        Element::Cannon(x) => s.cannons.push(x),
        Element::Tube(x) => s.tubes.push(x),
        Element::Box(x) => s.boxes.push(x),
        Element::Enemy(x) => s.enemies.push(x),
        Element::Coin(x) => s.coins.push(x),
    }
    s
}

pub fn forest() -> &'static Forest {
    static F: OnceLock<Forest> = OnceLock::new();
    F.get_or_init(|| {
        let ranges = AttributeRanges::default();
        let pool = dataset::sample_pool(2000, 5, &ElementCaps::MAX, &ranges);
        let labels = dataset::label_all(&pool.segments, &OracleConfig::default()).unwrap();
        let rows: Vec<Vec<f64>> = pool.segments.iter().map(|s| model_input(&s.to_feature_vector(), &ranges)).collect();
        let q: Vec<Quality> = labels.iter().map(|l| l.quality()).collect();
        train_forest(&rows, &q, &ForestParams { n_trees: 20, ..ForestParams::default() }, 6).unwrap()
    })
}

pub fn generator() -> &'static Generator {
    static G: OnceLock<Generator> = OnceLock::new();
    G.get_or_init(|| Generator::new(forest().clone(), GeneratorConfig::default()))
}
