mod common;

use cpforge::content_space::{TileGrid, ROWS};
use cpforge::generator::{categorize, GenerationParams, Level};
use cpforge::learn::model_input;
use cpforge::metrics::{density, grid_leniency, level_leniency, linearity, ncd};
use cpforge::oracle::{grid_is_playable, is_playable, Quality};
use cpforge::{rules, seed};
use rayon::prelude::*;

fn params(i: u64) -> GenerationParams {
    let s = seed::derive(77, i);
    let cat = |k: u64| (seed::derive(s, k) % 3) as u8 + 1;
    GenerationParams { leniency: cat(1), density: cat(2), linearity: cat(3), n_cps: 10, seed: s }
}

fn levels(n: u64) -> Vec<Level> {
    let g = common::generator();
    (0..n).into_par_iter().map(|i| g.generate_level(&params(i)).unwrap()).collect()
}

#[test]
fn five_hundred_levels_are_playable_and_constructive() {
    let g = common::generator();
    let all = levels(500);
    for (i, level) in all.iter().enumerate() {
        let p = params(i as u64);
        let grid = level.grid().unwrap();
        assert_eq!(grid.width(), 240);
        assert!(grid_is_playable(&grid, &g.cfg.jump), "level {i} {p:?}");
        for cp in &level.cps {
            assert!(rules::is_clean(&cp.segment));
            assert!(is_playable(&cp.segment, &g.cfg.jump));
            let x = model_input(&cp.segment.to_feature_vector(), &g.cfg.ranges);
            assert_eq!(g.forest.predict(&x).label, Quality::High);
            let (cats, diff) = categorize(&cp.segment, &g.cfg.bands);
            assert_eq!((cats, diff), (cp.categories, cp.difficulty));
            assert_eq!(cats.leniency, p.leniency);
            assert_eq!(cats.density, p.density);
        }
    }
}

#[test]
fn level_files_replay_byte_exact() {
    let g = common::generator();
    for i in 0..20 {
        let a = g.generate_level(&params(i)).unwrap().to_text().unwrap();
        let b = g.generate_level(&params(i)).unwrap().to_text().unwrap();
        assert_eq!(a, b);
        let back = Level::parse_text(&a).unwrap();
        assert_eq!(back.to_text().unwrap(), a);
    }
}

/// Standing positions found by walking down each column.
fn brute_density(g: &TileGrid) -> usize {
    let mut n = 0;
    for c in 0..g.width() {
        let mut open_run = 0;
        for r in 0..ROWS {
            if g.get(c, r).is_solid() {
                if open_run >= 2 {
                    n += 1;
                }
                open_run = 0;
            } else {
                open_run += 1;
            }
        }
    }
    n
}

#[test]
fn metrics_on_generated_levels() {
    for level in levels(100) {
        let grid = level.grid().unwrap();
        assert_eq!(density(&grid).0, brute_density(&grid));
        let l = linearity(&grid).unwrap();
        assert!((0.0..=1.0).contains(&l));
        let reparsed = TileGrid::parse_tile_file(&grid.to_tile_file()).unwrap();
        assert_eq!(grid_leniency(&reparsed), level_leniency(level.segments()));
    }
}

#[test]
fn ncd_separates_self_from_other() {
    let all = levels(101);
    let bytes: Vec<String> = all.iter().map(|l| l.grid().unwrap().to_ascii()).collect();
    for i in 0..100 {
        let (x, y) = (bytes[i].as_bytes(), bytes[i + 1].as_bytes());
        assert_ne!(x, y);
        let same = ncd(x, x).unwrap();
        let other = ncd(x, y).unwrap();
        assert!(same < other, "pair {i}: {same} vs {other}");
        assert!(other >= 0.0 && other <= 1.1);
    }
}
