use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cpforge::adapt::{run_session, AdaptState, Policy, SessionConfig, SimulatedAgent, ARMS, SUMMARY_HEADER};
use cpforge::content_space::TileGrid;
use cpforge::dataset::{self, Record};
use cpforge::generator::{render_ppm, GenerationParams, Generator, Level};
use cpforge::learn::{importance_csv, learn_from_records, Forest};
use cpforge::oracle::Quality;
use cpforge::metrics::{expressive_range, grid_leniency, level_leniency, ncd as ncd_of, report_batch, COMPRESSION_LEVEL, REPORT_HEADER};
use cpforge::seed;
use rayon::prelude::*;

use crate::{AdaptArgs, CliError, Config, Format, GenerateArgs, LearnArgs, MetricsArgs, RangeArgs, RenderArgs, SampleArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, data).map_err(|e| CliError::io(path, e))
}

fn in_file(path: &Path) -> impl FnOnce(cpforge::Error) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn load_forest(path: &Path) -> Result<Forest, CliError> {
    Forest::parse_model_text(&read(path)?).map_err(in_file(path))
}

/// Category used when a flag is omitted; drawn from the seed so it replays.
pub fn random_category(rng_seed: u64, salt: u64) -> u8 {
    (seed::derive2(rng_seed, 0xC47E_6085, salt) % 3) as u8 + 1
}

pub fn sample(cfg: &Config, a: &SampleArgs) -> Result<(), CliError> {
    let n = a.n.unwrap_or(cfg.samples);
    let rng_seed = a.seed.unwrap_or(cfg.seed);
    let pool = dataset::sample_pool(n, rng_seed, &cfg.caps, &cfg.ranges);
    let labels = dataset::label_all(&pool.segments, &cfg.oracle)?;
    let high = labels.iter().filter(|l| l.quality() == Quality::High).count();
    let records: Vec<Record> = pool
        .segments
        .iter()
        .zip(labels)
        .map(|(s, label)| Record { segment: s.clone(), label })
        .collect();
    write(&a.out, dataset::to_text(&records))?;
    eprintln!(
        "sample: kept {n} rule-clean segments of {} draws (retention {:.2}%), {high} high / {} low",
        pool.draws,
        100.0 * pool.retention(),
        n - high
    );
    Ok(())
}

pub fn learn(cfg: &Config, a: &LearnArgs) -> Result<(), CliError> {
    let records = dataset::parse_text(&read(&a.data)?).map_err(in_file(&a.data))?;
    let out = learn_from_records(&records, &cfg.learn, &cfg.ranges, a.seed.unwrap_or(cfg.seed)).map_err(|e| match e {
        cpforge::Error::SingleClass => CliError::Data(format!("{}: dataset holds a single class", a.data.display())),
        other => CliError::Data(format!("{}: {other}", a.data.display())),
    })?;
    write(&a.model, out.active.forest.to_model_text())?;
    let curve = a.curve.clone().unwrap_or_else(|| a.model.with_extension("curve.csv"));
    write(&curve, out.active.curve_csv())?;
    if let Some(p) = &a.importance {
        write(p, importance_csv(&out.importance, out.importance.len()))?;
    }
    let best = &out.active.history[out.active.best_round];
    eprintln!(
        "learn: {} clusters, {} validation, best round {} with {} labels, balanced accuracy {:.4}, HTER {:.4}{}",
        out.clusters,
        out.validation.len(),
        out.active.best_round,
        best.labels_used,
        best.rates.balanced_accuracy(),
        best.rates.hter(),
        if out.active.exhausted { ", pool exhausted" } else { "" }
    );
    Ok(())
}

fn write_renders(level: &Level, out: &Path, formats: &[Format]) -> Result<(), CliError> {
    for &f in formats {
        let path = out.with_extension(f.extension());
        match f {
            Format::Ascii => write(&path, level.grid()?.to_ascii())?,
            Format::Ppm => write(&path, level.to_ppm()?)?,
        }
    }
    Ok(())
}

pub fn generate(cfg: &Config, a: &GenerateArgs) -> Result<(), CliError> {
    let generator = Generator::new(load_forest(&a.model)?, cfg.generator());
    let rng_seed = a.seed.unwrap_or(cfg.seed);
    let params = GenerationParams {
        leniency: a.leniency.unwrap_or_else(|| random_category(rng_seed, 0)),
        density: a.density.unwrap_or_else(|| random_category(rng_seed, 1)),
        linearity: a.linearity.unwrap_or_else(|| random_category(rng_seed, 2)),
        n_cps: a.cps as usize,
        seed: rng_seed,
    };
    let start = Instant::now();
    let level = generator.generate_level(&params)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    write(&a.out, level.to_text()?)?;
    write_renders(&level, &a.out, &a.render)?;
    if a.time {
        eprintln!("generation_ms {ms:.3}");
    }
    Ok(())
}

/// A level file, or a bare tile file for which the leniency comes from the tiles.
struct Loaded {
    id: String,
    grid: TileGrid,
    leniency: f64,
    goal: Option<usize>,
}

fn load_level(path: &Path) -> Result<Loaded, CliError> {
    let text = read(path)?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if text.starts_with("TILES") {
        let grid = TileGrid::parse_tile_file(&text).map_err(in_file(path))?;
        let leniency = grid_leniency(&grid);
        return Ok(Loaded { id, grid, leniency, goal: None });
    }
    let level = Level::parse_text(&text).map_err(in_file(path))?;
    Ok(Loaded {
        id,
        grid: level.grid()?,
        leniency: level_leniency(level.segments()),
        goal: Some(level.goal_column()),
    })
}

/// Parsable files matching `pattern` in path order; failures are reported and skipped.
fn load_glob(pattern: &str) -> Result<Vec<Loaded>, CliError> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| CliError::Usage(format!("bad glob '{pattern}': {e}")))?
        .filter_map(|p| p.ok())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no files match '{pattern}'")));
    }
    let mut out = Vec::with_capacity(paths.len());
    for p in &paths {
        match load_level(p) {
            Ok(l) => out.push(l),
            Err(e) => eprintln!("warning: skipping {e}"),
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("none of the {} files matching '{pattern}' parsed", paths.len())));
    }
    Ok(out)
}

pub fn metrics(a: &MetricsArgs) -> Result<(), CliError> {
    let levels = load_glob(&a.levels)?;
    let rows: Vec<(String, &TileGrid, f64)> = levels.iter().map(|l| (l.id.clone(), &l.grid, l.leniency)).collect();
    let mut s = format!("{REPORT_HEADER}\n");
    for r in report_batch(&rows)? {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    write(&a.out, s)
}

pub fn ncd(a: &MetricsArgs) -> Result<(), CliError> {
    let levels = load_glob(&a.levels)?;
    let bytes: Vec<String> = levels.iter().map(|l| l.grid.to_ascii()).collect();
    let pairs: Vec<(usize, usize)> = (0..levels.len()).flat_map(|i| (i + 1..levels.len()).map(move |j| (i, j))).collect();
    let dists = pairs
        .par_iter()
        .map(|&(i, j)| ncd_of(bytes[i].as_bytes(), bytes[j].as_bytes()))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut s = String::from("id_a,id_b,ncd\n");
    for (&(i, j), d) in pairs.iter().zip(dists) {
        let _ = writeln!(s, "{},{},{d:.6}", levels[i].id, levels[j].id);
    }
    write(&a.out, s)?;
    let meta = a.out.with_extension("meta");
    write(&meta, format!("compressor = \"deflate\"\nlevel = {COMPRESSION_LEVEL}\nlevels = {}\n", levels.len()))
}

/// The nine fixed-one-parameter sets and the all-random set.
pub fn range_sets() -> Vec<(String, [Option<u8>; 3])> {
    let mut sets = Vec::new();
    for (p, name) in ["leniency", "density", "linearity"].iter().enumerate() {
        for c in 1..=3u8 {
            let mut fixed = [None; 3];
            fixed[p] = Some(c);
            sets.push((format!("{name}_{c}"), fixed));
        }
    }
    sets.push(("random".to_string(), [None; 3]));
    sets
}

fn histogram_csv(bins: usize, columns: &[(&str, Vec<usize>)]) -> String {
    let mut s = String::from("bin,lower,upper");
    for (name, _) in columns {
        let _ = write!(s, ",{name}");
    }
    s.push('\n');
    for b in 0..bins {
        let _ = write!(s, "{b},{:.4},{:.4}", b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
        for (_, h) in columns {
            let _ = write!(s, ",{}", h[b]);
        }
        s.push('\n');
    }
    s
}

pub fn range(cfg: &Config, a: &RangeArgs) -> Result<(), CliError> {
    let generator = Generator::new(load_forest(&a.model)?, cfg.generator());
    let per = a.per_setting.unwrap_or(cfg.range.per_setting);
    let rng_seed = a.seed.unwrap_or(cfg.seed);
    for (s, (name, fixed)) in range_sets().into_iter().enumerate() {
        let levels = (0..per)
            .into_par_iter()
            .map(|i| {
                let level_seed = seed::derive2(rng_seed, s as u64, i as u64);
                let pick = |k: usize| fixed[k].unwrap_or_else(|| random_category(level_seed, k as u64));
                let params = GenerationParams {
                    leniency: pick(0),
                    density: pick(1),
                    linearity: pick(2),
                    n_cps: cfg.range.cps,
                    seed: level_seed,
                };
                let level = generator.generate_level(&params)?;
                let grid = level.grid()?;
                Ok((level.to_text()?, grid, level_leniency(level.segments())))
            })
            .collect::<Result<Vec<_>, cpforge::Error>>()?;
        let dir = a.out_dir.join(&name);
        let width = per.saturating_sub(1).to_string().len().max(4);
        for (i, (text, _, _)) in levels.iter().enumerate() {
            write(&dir.join(format!("level_{i:0width$}.lvl")), text)?;
        }
        let rows: Vec<(String, &TileGrid, f64)> = levels.iter().enumerate().map(|(i, l)| (i.to_string(), &l.1, l.2)).collect();
        let reports = report_batch(&rows)?;
        let bins = cfg.range.bins;
        let lin = expressive_range(&reports.iter().map(|r| r.linearity).collect::<Vec<_>>(), bins)?;
        let den = expressive_range(&reports.iter().map(|r| r.density_raw as f64).collect::<Vec<_>>(), bins)?;
        let len = expressive_range(&reports.iter().map(|r| r.leniency_raw).collect::<Vec<_>>(), bins)?;
        let csv = histogram_csv(
            bins,
            &[("linearity", lin.histogram), ("density", den.histogram), ("leniency", len.histogram)],
        );
        write(&dir.join("histogram.csv"), csv)?;
        eprintln!("range: {name} done ({per} levels)");
    }
    Ok(())
}

/// A configured profile name, or five comma-separated probabilities.
pub fn parse_agent(cfg: &Config, spec: &str) -> Result<SimulatedAgent, CliError> {
    if let Some(p) = cfg.adapt.profiles.get(spec) {
        return Ok(SimulatedAgent::new(spec, *p)?);
    }
    let vals: Vec<f64> = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("agent '{spec}' is neither a profile nor a probability vector")))?;
    let p: [f64; ARMS] = vals
        .try_into()
        .map_err(|_| CliError::Usage(format!("agent vector '{spec}' needs {ARMS} values")))?;
    Ok(SimulatedAgent::new("custom", p)?)
}

pub fn adapt(cfg: &Config, a: &AdaptArgs) -> Result<(), CliError> {
    let agent = parse_agent(cfg, &a.agent)?;
    let theta = a.theta.unwrap_or(cfg.adapt.theta_opt);
    let trials = a.trials.unwrap_or(cfg.adapt.trials);
    let session = SessionConfig {
        games: a.games.unwrap_or(cfg.adapt.games),
        max_plays: None,
        cps_per_game: cfg.adapt.cps_per_game,
        policy: if a.static_baseline { Policy::Static } else { Policy::Adaptive },
    };
    let generator = match &a.model {
        Some(p) => Some(Generator::new(load_forest(p)?, cfg.generator())),
        None => None,
    };
    let rng_seed = a.seed.unwrap_or(cfg.seed);
    let width = trials.saturating_sub(1).to_string().len().max(2);
    let mut summary = format!("{SUMMARY_HEADER}\n");
    let mut state = AdaptState::new(theta)?;
    let mut total = 0.0;
    for trial in 0..trials {
        let s = run_session(&agent, &session, state.clone(), generator.as_ref(), seed::derive(rng_seed, trial as u64))?;
        write(&a.out_dir.join(format!("trace_{trial:0width$}.csv")), s.trace.to_csv())?;
        let regret = if s.trace.events.is_empty() { 0.0 } else { s.final_regret()? };
        let _ = writeln!(
            summary,
            "{trial},{theta},{},{},{:.6},{regret:.6}",
            agent.name,
            s.games.len(),
            s.mean_completion()
        );
        total += s.mean_completion();
        state = if a.carry_over { s.state.carry_over() } else { AdaptState::new(theta)? };
    }
    write(&a.out_dir.join("summary.csv"), summary)?;
    if trials > 0 {
        eprintln!("adapt: {} over {trials} trials, mean completion {:.4}", agent.name, total / trials as f64);
    }
    Ok(())
}

pub fn render(a: &RenderArgs) -> Result<(), CliError> {
    let l = load_level(&a.level)?;
    match a.format {
        Format::Ascii => write(&a.out, l.grid.to_ascii()),
        Format::Ppm => write(&a.out, render_ppm(&l.grid, l.goal)),
    }
}
