use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use cpforge::dataset;
use cpforge::generator::Level;
use tempfile::TempDir;

const SMALL: &str = "[learn]\nvalidation = 300\n[learn.forest]\nn_trees = 15\n[learn.active]\nmax_iterations = 4\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cpforge"));
    c.env_remove("CPFORGE_CONFIG");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// A shared small dataset and model, built once.
fn fixture() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = TempDir::new().unwrap().keep();
        fs::write(dir.join("small.toml"), SMALL).unwrap();
        ok(&dir, &["sample", "--out", "data.txt", "--n", "1200", "--seed", "3"]);
        ok(&dir, &["--config", "small.toml", "learn", "--data", "data.txt", "--model", "model.txt", "--seed", "3"]);
        dir
    })
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn smoke_sample_round_trips() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["sample", "--out", "s.txt", "--n", "10", "--seed", "5"]);
    let text = fs::read_to_string(d.path().join("s.txt")).unwrap();
    let recs = dataset::parse_text(&text).unwrap();
    assert_eq!(recs.len(), 10);
    assert_eq!(dataset::to_text(&recs), text);
    assert!(String::from_utf8_lossy(&out.stderr).contains("retention"));
    ok(d.path(), &["sample", "--out", "t.txt", "--n", "10", "--seed", "5"]);
    assert_eq!(fs::read(d.path().join("t.txt")).unwrap(), text.as_bytes());
}

#[test]
fn learning_curve_columns() {
    let dir = fixture();
    let rows = csv_rows(&dir.join("model.curve.csv"));
    assert!(rows.len() >= 2);
    let mut best = f64::MIN;
    for r in &rows {
        let f: Vec<f64> = r.iter().map(|v| v.parse().unwrap()).collect();
        // iteration, labels, accuracy, type I, type II, HTER, best
        assert_eq!(f[5], (f[3] + f[4]) / 2.0);
        assert!(f[6] >= best);
        best = f[6];
    }
}

#[test]
fn generate_records_categories_and_renders() {
    let dir = fixture();
    let d = TempDir::new().unwrap();
    let model = dir.join("model.txt");
    let m = model.to_str().unwrap();
    let out = ok(d.path(), &[
        "generate", "--model", m, "--leniency", "3", "--density", "1", "--linearity", "3", "--cps", "10", "--seed", "7",
        "--out", "l.lvl", "--render", "ascii", "--render", "ppm", "--time",
    ]);
    let level = Level::parse_text(&fs::read_to_string(d.path().join("l.lvl")).unwrap()).unwrap();
    assert_eq!((level.params.leniency, level.params.density, level.params.linearity), (3, 1, 3));
    assert_eq!(level.cps.len(), 10);
    assert_eq!(fs::read_to_string(d.path().join("l.txt")).unwrap(), level.grid().unwrap().to_ascii());
    assert_eq!(fs::read(d.path().join("l.ppm")).unwrap(), level.to_ppm().unwrap());
    assert!(String::from_utf8_lossy(&out.stderr).contains("generation_ms"));

    // omitted categories come from the seed and are recorded
    ok(d.path(), &["generate", "--model", m, "--seed", "11", "--out", "r1.lvl"]);
    ok(d.path(), &["generate", "--model", m, "--seed", "11", "--out", "r2.lvl"]);
    let r1 = fs::read_to_string(d.path().join("r1.lvl")).unwrap();
    assert_eq!(r1, fs::read_to_string(d.path().join("r2.lvl")).unwrap());
    let p = Level::parse_text(&r1).unwrap().params;
    assert!([p.leniency, p.density, p.linearity].iter().all(|c| (1..=3).contains(c)));
}

#[test]
fn metrics_ncd_and_render() {
    let dir = fixture();
    let d = TempDir::new().unwrap();
    let m = dir.join("model.txt");
    for s in 0..6 {
        ok(d.path(), &["generate", "--model", m.to_str().unwrap(), "--seed", &s.to_string(), "--out", &format!("lv/{s}.lvl")]);
    }
    fs::write(d.path().join("lv/broken.lvl"), "LEVEL what\n").unwrap();
    let out = ok(d.path(), &["metrics", "--levels", "lv/*.lvl", "--out", "m.csv"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(csv_rows(&d.path().join("m.csv")).len(), 6);
    ok(d.path(), &["ncd", "--levels", "lv/*.lvl", "--out", "n.csv"]);
    let rows = csv_rows(&d.path().join("n.csv"));
    assert_eq!(rows.len(), 6 * 5 / 2);
    assert!(rows.iter().all(|r| r.len() == 3 && r[2].parse::<f64>().is_ok()));
    assert!(fs::read_to_string(d.path().join("n.meta")).unwrap().contains("level = 9"));

    ok(d.path(), &["render", "--level", "lv/0.lvl", "--format", "ascii", "--out", "0.txt"]);
    let ascii = fs::read_to_string(d.path().join("0.txt")).unwrap();
    let tiles = format!("TILES w=240 h=15\n{ascii}");
    fs::write(d.path().join("0.tiles"), &tiles).unwrap();
    ok(d.path(), &["render", "--level", "0.tiles", "--format", "ascii", "--out", "0b.txt"]);
    assert_eq!(fs::read_to_string(d.path().join("0b.txt")).unwrap(), ascii);
    ok(d.path(), &["render", "--level", "lv/0.lvl", "--format", "ppm", "--out", "0.ppm"]);
    assert!(fs::read(d.path().join("0.ppm")).unwrap().starts_with(b"P6\n1920 120\n255\n"));
}

#[test]
fn range_writes_ten_sets() {
    let dir = fixture();
    let d = TempDir::new().unwrap();
    ok(d.path(), &["range", "--model", dir.join("model.txt").to_str().unwrap(), "--out-dir", "r", "--per-setting", "4"]);
    let mut sets: Vec<String> = fs::read_dir(d.path().join("r")).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    sets.sort();
    assert_eq!(sets.len(), 10);
    for s in &sets {
        let set = d.path().join("r").join(s);
        let levels = fs::read_dir(&set).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "lvl")).count();
        assert_eq!(levels, 4);
        let hist = csv_rows(&set.join("histogram.csv"));
        assert_eq!(hist.len(), 20);
        for col in 3..6 {
            assert_eq!(hist.iter().map(|r| r[col].parse::<usize>().unwrap()).sum::<usize>(), 4);
        }
    }
    let lvl = fs::read_to_string(d.path().join("r/linearity_1/level_0000.lvl")).unwrap();
    assert_eq!(Level::parse_text(&lvl).unwrap().params.linearity, 1);
}

fn mean_completion(p: &Path) -> f64 {
    let rows = csv_rows(p);
    rows.iter().map(|r| r[4].parse::<f64>().unwrap()).sum::<f64>() / rows.len() as f64
}

#[test]
fn adapt_summary_and_baseline() {
    let d = TempDir::new().unwrap();
    for theta in ["0.80", "0.95"] {
        ok(d.path(), &["adapt", "--agent", "novice", "--theta", theta, "--games", "30", "--trials", "30", "--out-dir", theta]);
    }
    let summary = d.path().join("0.80/summary.csv");
    assert_eq!(csv_rows(&summary).len(), 30);
    assert!(d.path().join("0.80/trace_29.csv").exists());
    assert!(mean_completion(&d.path().join("0.95/summary.csv")) >= mean_completion(&summary));

    ok(d.path(), &["adapt", "--agent", "0.9,0.8,0.7,0.6,0.5", "--static", "--games", "200", "--trials", "1", "--out-dir", "st"]);
    let trace = csv_rows(&d.path().join("st/trace_00.csv"));
    let mut counts = [0usize; 5];
    for r in &trace {
        counts[r[1].parse::<usize>().unwrap() - 1] += 1;
    }
    let n = trace.len() as f64;
    assert!(counts.iter().all(|&c| (c as f64 / n - 0.2).abs() < 0.06), "{counts:?}");

    let fixture_model = fixture().join("model.txt");
    ok(d.path(), &["adapt", "--agent", "skilful", "--trials", "2", "--games", "5", "--model", fixture_model.to_str().unwrap(), "--carry-over", "--out-dir", "gen"]);
    assert_eq!(csv_rows(&d.path().join("gen/summary.csv")).len(), 2);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let code = |args: &[&str]| run(p, args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["generate", "--model", "m", "--leniency", "4", "--out", "x"]), 1);
    assert_eq!(code(&["adapt", "--agent", "0.5,0.6,0.4,0.3,0.2", "--out-dir", "a"]), 1);
    assert_eq!(code(&["adapt", "--agent", "nobody", "--out-dir", "a"]), 1);
    assert_eq!(code(&["generate", "--model", "missing.txt", "--out", "x"]), 2);
    assert_eq!(code(&["metrics", "--levels", "none/*.lvl", "--out", "m.csv"]), 2);
    fs::write(p.join("junk.lvl"), "junk").unwrap();
    assert_eq!(code(&["metrics", "--levels", "junk.lvl", "--out", "m.csv"]), 2);
    fs::write(p.join("one.txt"), dataset::to_text(&[])).unwrap();
    assert_eq!(code(&["learn", "--data", "one.txt", "--model", "m.txt"]), 2);

    let model = fixture().join("model.txt");
    fs::write(p.join("tight.toml"), "[generator]\nattempt_budget = 1\n").unwrap();
    let out = bin()
        .current_dir(p)
        .env("CPFORGE_CONFIG", "tight.toml")
        .args(["generate", "--model", model.to_str().unwrap(), "--leniency", "1", "--density", "3", "--linearity", "1", "--out", "x.lvl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    fs::write(p.join("bad.toml"), "nonsense = 1\n").unwrap();
    assert_eq!(code(&["--config", "bad.toml", "sample", "--out", "s.txt", "--n", "1"]), 2);
}

#[test]
fn single_class_dataset_fails() {
    let d = TempDir::new().unwrap();
    let text = fs::read_to_string(fixture().join("data.txt")).unwrap();
    let high: Vec<_> = dataset::parse_text(&text)
        .unwrap()
        .into_iter()
        .filter(|r| r.label.quality() == cpforge::oracle::Quality::High)
        .collect();
    fs::write(d.path().join("high.txt"), dataset::to_text(&high)).unwrap();
    fs::write(d.path().join("small.toml"), "[learn]\nvalidation = 100\n").unwrap();
    let out = run(d.path(), &["--config", "small.toml", "learn", "--data", "high.txt", "--model", "m.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single class"));
}
