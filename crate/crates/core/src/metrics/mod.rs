//! Level metrics: linearity, density, leniency, compression distance and
//! expressive-range summaries.

mod ncd;

pub use ncd::{compressed_len, ncd, COMPRESSION_LEVEL};

use crate::content_space::{SegmentDescriptor, Tile, TileGrid, ROWS};
use crate::error::{Error, Result};

/// Per-element leniency contributions.
pub const ENEMY_SCORE: f64 = -1.0;
pub const HAZARD_SCORE: f64 = -0.5;
pub const POWERUP_SCORE: f64 = 1.0;

/// Leniency of one segment from its descriptor. Each powerup box tile
/// counts once, so the score can be recovered from the tile map.
pub fn segment_leniency(segment: &SegmentDescriptor) -> f64 {
    let hazards = segment.gaps.len() + segment.cannons.len() + segment.flower_tubes();
    ENEMY_SCORE * segment.enemies.len() as f64
        + HAZARD_SCORE * hazards as f64
        + POWERUP_SCORE * segment.powerup_boxes() as f64
}

pub fn level_leniency<'a>(segments: impl IntoIterator<Item = &'a SegmentDescriptor>) -> f64 {
    segments.into_iter().map(segment_leniency).sum()
}

/// Leniency recovered from a rendered map: enemy tiles, cannon stacks,
/// flower heads (two per tube), runs of empty columns, powerup tiles.
pub fn grid_leniency(grid: &TileGrid) -> f64 {
    let mut enemies = 0usize;
    let mut cannons = 0usize;
    let mut flower_tiles = 0usize;
    let mut powerups = 0usize;
    for (c, r, t) in grid.cells() {
        match t {
            t if t.is_enemy() => enemies += 1,
            Tile::Cannon if r == 0 || grid.get(c, r - 1) != Tile::Cannon => cannons += 1,
            Tile::FlowerHead => flower_tiles += 1,
            Tile::PowerupBox => powerups += 1,
            _ => {}
        }
    }
    let mut gaps = 0;
    let mut in_gap = false;
    for c in 0..grid.width() {
        let g = grid.is_gap_column(c);
        if g && !in_gap {
            gaps += 1;
        }
        in_gap = g;
    }
    let hazards = gaps + cannons + flower_tiles / 2;
    ENEMY_SCORE * enemies as f64 + HAZARD_SCORE * hazards as f64 + POWERUP_SCORE * powerups as f64
}

/// Height of the topmost terrain tile per column; columns without terrain are omitted.
pub fn profile(grid: &TileGrid) -> Vec<(usize, usize)> {
    (0..grid.width())
        .filter_map(|c| {
            (0..ROWS)
                .find(|&r| grid.get(c, r).is_terrain())
                .map(|r| (c, ROWS - r))
        })
        .collect()
}

/// Coefficient of determination of a least-squares line through the profile.
pub fn linearity(grid: &TileGrid) -> Result<f64> {
    let p = profile(grid);
    let pts: Vec<(f64, f64)> = p.iter().map(|&(c, h)| (c as f64, h as f64)).collect();
    r_squared(&pts)
}

pub(crate) fn r_squared(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.is_empty() {
        return Err(Error::EmptyInput("profile"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return Ok(1.0);
    }
    if sxx == 0.0 {
        return Ok(0.0);
    }
    // SS_res = syy - sxy^2/sxx for the fitted line
    Ok((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}

/// Rows reserved per column when normalizing standing positions.
pub const DENSITY_ROWS: f64 = 3.0;

/// Standing positions: open cells with open headroom above and solid support below.
pub fn density(grid: &TileGrid) -> (usize, f64) {
    let mut count = 0;
    for c in 0..grid.width() {
        for r in 1..ROWS - 1 {
            if !grid.is_solid(c, r) && !grid.is_solid(c, r - 1) && grid.is_solid(c, r + 1) {
                count += 1;
            }
        }
    }
    let norm = (count as f64 / (grid.width() as f64 * DENSITY_ROWS)).min(1.0);
    (count, norm)
}

/// Summary row for one level.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub level_id: String,
    pub linearity: f64,
    pub density_raw: usize,
    pub density_norm: f64,
    pub leniency_raw: f64,
    /// Min-max normalized within the batch the report was built in.
    pub leniency_norm: f64,
}

pub const REPORT_HEADER: &str = "level_id,linearity,density_raw,density_norm,leniency_raw,leniency_norm";

impl MetricReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{},{:.6},{},{:.6}",
            self.level_id, self.linearity, self.density_raw, self.density_norm, self.leniency_raw, self.leniency_norm
        )
    }
}

/// Reports for a batch of levels given as (id, grid, leniency).
pub fn report_batch(levels: &[(String, &TileGrid, f64)]) -> Result<Vec<MetricReport>> {
    let lens: Vec<f64> = levels.iter().map(|l| l.2).collect();
    let norm = min_max(&lens).0;
    levels
        .iter()
        .zip(norm)
        .map(|((id, grid, len), ln)| {
            let (raw, dn) = density(grid);
            Ok(MetricReport {
                level_id: id.clone(),
                linearity: linearity(grid)?,
                density_raw: raw,
                density_norm: dn,
                leniency_raw: *len,
                leniency_norm: ln,
            })
        })
        .collect()
}

/// Min-max normalization; a constant input maps to 0.5 and reports `true`.
pub fn min_max(scores: &[f64]) -> (Vec<f64>, bool) {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if scores.is_empty() || hi - lo == 0.0 {
        return (vec![0.5; scores.len()], !scores.is_empty());
    }
    (scores.iter().map(|s| (s - lo) / (hi - lo)).collect(), false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpressiveRange {
    pub normalized: Vec<f64>,
    /// Counts over equal-width bins of [0, 1]; the last bin is closed.
    pub histogram: Vec<usize>,
    /// All scores were equal.
    pub constant: bool,
}

impl ExpressiveRange {
    pub fn histogram_csv(&self) -> String {
        let bins = self.histogram.len();
        let mut s = String::from("bin,lower,upper,count\n");
        for (i, n) in self.histogram.iter().enumerate() {
            let lo = i as f64 / bins as f64;
            let hi = (i + 1) as f64 / bins as f64;
            s.push_str(&format!("{i},{lo:.4},{hi:.4},{n}\n"));
        }
        s
    }
}

pub fn expressive_range(scores: &[f64], bins: usize) -> Result<ExpressiveRange> {
    if scores.len() < 2 {
        return Err(Error::EmptyInput("expressive range needs at least two levels"));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    let (normalized, constant) = min_max(scores);
    let mut histogram = vec![0; bins];
    for v in &normalized {
        let i = ((v * bins as f64) as usize).min(bins - 1);
        histogram[i] += 1;
    }
    Ok(ExpressiveRange { normalized, histogram, constant })
}
