//! Constructive primitives and online level assembly.

mod categorize;
mod level;
mod sampler;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use categorize::{
    categorize, density_category, difficulty, hills_overlap, leniency_category, linearity_category, relief,
    Categories, CategoryBands, LeniencyBands, LinearityBands,
};
pub use level::{render_ppm, Level, GOAL_X, PPM_BLOCK};
pub use sampler::CpTarget;

use crate::content_space::{AttributeRanges, SegmentDescriptor, TileGrid};
use crate::error::{Error, Result};
use crate::learn::{model_input, Forest};
use crate::oracle::{grid_is_playable, is_playable, JumpModel, Quality};
use crate::{rules, seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Shared with sampling and the forest inputs; not read from the
    /// generator section of a config file.
    #[serde(skip)]
    pub ranges: AttributeRanges,
    pub bands: CategoryBands,
    /// Shared with the oracle.
    #[serde(skip)]
    pub jump: JumpModel,
    pub attempt_budget: usize,
    /// Fresh CPs tried at one level position before giving up.
    pub seam_retries: usize,
    /// Platform height range for the entry segment.
    pub entry_height: (i32, i32),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            ranges: AttributeRanges::default(),
            bands: CategoryBands::default(),
            jump: JumpModel::default(),
            attempt_budget: 10_000,
            seam_retries: 50,
            entry_height: (2, 5),
        }
    }
}

/// A segment that passed the rules and the forest and has known categories.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructivePrimitive {
    pub segment: SegmentDescriptor,
    pub categories: Categories,
    pub difficulty: u8,
    /// Share of trees voting high.
    pub confidence: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationParams {
    pub leniency: u8,
    pub density: u8,
    pub linearity: u8,
    pub n_cps: usize,
    pub seed: u64,
}

impl GenerationParams {
    pub fn validate(&self) -> Result<()> {
        categorize::check_category("leniency", self.leniency)?;
        categorize::check_category("density", self.density)?;
        categorize::check_category("linearity", self.linearity)?;
        if self.n_cps == 0 {
            return Err(Error::InvalidArgument("n_cps must be at least 1".into()));
        }
        Ok(())
    }
}

/// RNG stream reserved for the platform-height plan.
const PLATFORM_STREAM: u64 = u64::MAX;

pub struct Generator {
    pub forest: Forest,
    pub cfg: GeneratorConfig,
}

impl Generator {
    pub fn new(forest: Forest, cfg: GeneratorConfig) -> Self {
        Generator { forest, cfg }
    }

    fn matches(&self, target: &CpTarget, cats: Categories, diff: u8, seg: &SegmentDescriptor) -> bool {
        let lin_ok = match target.linearity {
            None => true,
            Some(3) if target.density_overrides() => relief(seg) <= self.cfg.bands.linearity.smooth_max_relief,
            Some(c) => cats.linearity == c,
        };
        target.leniency.is_none_or(|c| cats.leniency == c)
            && target.density.is_none_or(|c| cats.density == c)
            && target.difficulty.is_none_or(|d| diff == d)
            && target.platform_height.is_none_or(|h| seg.platform_height == h)
            && lin_ok
    }

    /// Rejection loop for one CP.
    pub fn produce_cp<R: Rng + ?Sized>(&self, target: &CpTarget, rng: &mut R) -> Result<ConstructivePrimitive> {
        for d in [target.leniency, target.density, target.linearity] {
            if let Some(c) = d {
                categorize::check_category("target", c)?;
            }
        }
        if let Some(d) = target.difficulty {
            if !(1..=5).contains(&d) {
                return Err(Error::InvalidArgument(format!("difficulty {d} outside 1..=5")));
            }
        }
        let max_gap = self.cfg.jump.max_jump_span as i32 - 1;
        for _ in 0..self.cfg.attempt_budget {
            let Some(seg) = sampler::candidate(rng, target, &self.cfg.ranges, &self.cfg.bands, max_gap) else {
                continue;
            };
            let (cats, diff) = categorize(&seg, &self.cfg.bands);
            if !self.matches(target, cats, diff, &seg) || !rules::is_clean(&seg) || !is_playable(&seg, &self.cfg.jump) {
                continue;
            }
            let p = self.forest.predict(&model_input(&seg.to_feature_vector(), &self.cfg.ranges));
            if p.label == Quality::High {
                return Ok(ConstructivePrimitive { segment: seg, categories: cats, difficulty: diff, confidence: p.confidence });
            }
        }
        Err(Error::Unsatisfiable { constraint: target.describe(), attempts: self.cfg.attempt_budget })
    }

    /// Full level: flat entry, `n_cps` CPs at the requested categories, flat exit.
    pub fn generate_level(&self, params: &GenerationParams) -> Result<Level> {
        params.validate()?;
        let heights = platform_plan(params, &self.cfg);
        let entry = SegmentDescriptor::empty(heights[0]);
        let mut grid = entry.render_tiles()?;
        let mut cps = Vec::with_capacity(params.n_cps);
        for k in 1..=params.n_cps {
            let target = CpTarget {
                leniency: Some(params.leniency),
                density: Some(params.density),
                linearity: Some(params.linearity),
                difficulty: None,
                platform_height: Some(heights[k]),
            };
            let mut placed = false;
            for retry in 0..self.cfg.seam_retries {
                let mut rng = seed::rng(seed::derive2(params.seed, k as u64, retry as u64));
                let cp = self.produce_cp(&target, &mut rng)?;
                let mut next = grid.clone();
                next.append(&cp.segment.render_tiles()?);
                if grid_is_playable(&next, &self.cfg.jump) {
                    grid = next;
                    cps.push(cp);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Unsatisfiable {
                    constraint: format!("playable seam at CP {k} ({})", target.describe()),
                    attempts: self.cfg.seam_retries,
                });
            }
        }
        let exit = SegmentDescriptor::empty(*heights.last().expect("plan is non-empty"));
        grid.append(&exit.render_tiles()?);
        if !grid_is_playable(&grid, &self.cfg.jump) {
            return Err(Error::Unsatisfiable { constraint: "playable exit".into(), attempts: 1 });
        }
        Ok(Level { params: *params, entry, cps, exit })
    }
}

/// Platform heights for entry, each CP, and the exit (`n_cps + 2` values).
/// Smooth levels climb or descend in single steps, medium ones wander by at
/// most one tile and rough ones jump several tiles at a time.
pub fn platform_plan(params: &GenerationParams, cfg: &GeneratorConfig) -> Vec<i32> {
    let (lo, hi) = cfg.ranges.platform_height;
    let mut rng = seed::stream(params.seed, PLATFORM_STREAM);
    let (e0, e1) = cfg.entry_height;
    let h0 = rng.random_range(e0.max(lo)..=e1.min(hi));
    let n = params.n_cps as i32;
    let mut h = Vec::with_capacity(params.n_cps + 2);
    h.push(h0);
    // a step may not exceed what can be jumped up
    let max_step = (cfg.jump.max_jump_height as i32 - 1).clamp(1, 3);
    match params.linearity {
        3 => {
            let (dir, room) = if hi - h0 >= h0 - lo { (1, hi - h0) } else { (-1, h0 - lo) };
            let steps = room.min((n + 1) / 2);
            for k in 1..=n {
                h.push(h0 + dir * (k * steps / n));
            }
        }
        2 => {
            let mut cur = h0;
            for _ in 0..n {
                cur = (cur + rng.random_range(-1..=1)).clamp(lo, hi);
                h.push(cur);
            }
        }
        _ => {
            let mut cur = h0;
            for _ in 0..n {
                cur = loop {
                    let step = rng.random_range(1..=max_step) * if rng.random_bool(0.5) { 1 } else { -1 };
                    let next = cur + step;
                    if (lo..=hi).contains(&next) {
                        break next;
                    }
                };
                h.push(cur);
            }
        }
    }
    h.push(*h.last().expect("non-empty"));
    h
}

impl Level {
    /// The stitched tile map of the whole level.
    pub fn grid(&self) -> Result<TileGrid> {
        let grids = self.segments().map(|s| s.render_tiles()).collect::<Result<Vec<_>>>()?;
        Ok(TileGrid::concat(&grids))
    }
}
