//! Programmatic quality annotator: playability, resource reachability,
//! difficulty band and a few layout heuristics.

mod reach;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use reach::{grid_is_playable, reachable_cells, start_cell, JumpModel, Reach};

use crate::content_space::*;
use crate::error::{Error, Result};
use crate::metrics::segment_leniency;
use crate::rules;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub jump: JumpModel,
    /// Leniency scores below this are too hard.
    pub leniency_low: f64,
    /// Leniency scores above this are too easy.
    pub leniency_high: f64,
    /// Share of surface columns that may hold obstacles.
    pub max_obstacle_cover: f64,
    pub check_obstacle_cover: bool,
    pub check_stacked_boxes: bool,
    pub check_gap_landing: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            jump: JumpModel::default(),
            leniency_low: -5.5,
            leniency_high: 1.0,
            max_obstacle_cover: 0.6,
            check_obstacle_cover: true,
            check_stacked_boxes: true,
            check_gap_landing: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    Unplayable,
    UnreachableResource,
    TooHard,
    TooEasy,
    Unappealing,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::Unplayable,
        Reason::UnreachableResource,
        Reason::TooHard,
        Reason::TooEasy,
        Reason::Unappealing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reason::Unplayable => "unplayable",
            Reason::UnreachableResource => "unreachable_resource",
            Reason::TooHard => "too_hard",
            Reason::TooEasy => "too_easy",
            Reason::Unappealing => "unappealing",
        }
    }

    pub fn from_name(s: &str) -> Option<Reason> {
        Reason::ALL.into_iter().find(|r| r.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quality {
    Low,
    High,
}

impl Quality {
    pub fn name(self) -> &'static str {
        match self {
            Quality::Low => "low",
            Quality::High => "high",
        }
    }

    pub fn from_name(s: &str) -> Option<Quality> {
        match s {
            "low" => Some(Quality::Low),
            "high" => Some(Quality::High),
            _ => None,
        }
    }

    /// Class index used by the forest: low = 0, high = 1.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary label with the reasons for a low verdict; high iff no reasons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QualityLabel {
    reasons: Vec<Reason>,
}

impl QualityLabel {
    pub fn high() -> Self {
        QualityLabel { reasons: Vec::new() }
    }

    pub fn low(mut reasons: Vec<Reason>) -> Self {
        reasons.sort();
        reasons.dedup();
        QualityLabel { reasons }
    }

    pub fn quality(&self) -> Quality {
        if self.reasons.is_empty() {
            Quality::High
        } else {
            Quality::Low
        }
    }

    pub fn reasons(&self) -> &[Reason] {
        &self.reasons
    }

    pub fn has(&self, r: Reason) -> bool {
        self.reasons.contains(&r)
    }
}

/// Playability of a single conflict-free segment.
pub fn is_playable(segment: &SegmentDescriptor, model: &JumpModel) -> bool {
    segment.validate().is_ok() && grid_is_playable(&segment.render_unchecked(), model)
}

/// Labels a conflict-free segment.
pub fn annotate(segment: &SegmentDescriptor, cfg: &OracleConfig) -> Result<QualityLabel> {
    segment.validate()?;
    let report = rules::check_conflicts(segment);
    if !report.is_clean() {
        return Err(Error::Conflicting(report.summary()));
    }
    Ok(annotate_clean(segment, cfg))
}

/// `annotate` without the validity and conflict checks.
pub(crate) fn annotate_clean(segment: &SegmentDescriptor, cfg: &OracleConfig) -> QualityLabel {
    let grid = segment.render_unchecked();
    let mut reasons = Vec::new();

    let reach = start_cell(&grid, 0).map(|s| reachable_cells(&grid, s, &cfg.jump).expect("start is standing"));
    let playable = reach
        .as_ref()
        .is_some_and(|r| (0..ROWS).any(|row| r.can_stand(grid.width() - 1, row)));
    if !playable {
        reasons.push(Reason::Unplayable);
    }
    if !resources_reachable(segment, reach.as_ref()) {
        reasons.push(Reason::UnreachableResource);
    }

    let score = segment_leniency(segment);
    if score < cfg.leniency_low {
        reasons.push(Reason::TooHard);
    } else if score > cfg.leniency_high {
        reasons.push(Reason::TooEasy);
    }

    if (cfg.check_obstacle_cover && crowded(segment, cfg.max_obstacle_cover))
        || (cfg.check_stacked_boxes && stacked_boxes(segment))
        || (cfg.check_gap_landing && enemy_at_gap_exit(segment))
    {
        reasons.push(Reason::Unappealing);
    }
    QualityLabel::low(reasons)
}

/// Coins are collected by passing through them, boxes by a hit from below.
fn resources_reachable(segment: &SegmentDescriptor, reach: Option<&Reach>) -> bool {
    let Some(reach) = reach else {
        return segment.coins.is_empty() && segment.boxes.is_empty();
    };
    let coins = segment
        .coins
        .iter()
        .all(|c| (c.x..c.x + c.width).all(|x| reach.visited(x as usize, c.y as usize)));
    let boxes = segment.boxes.iter().all(|b| {
        let below = b.y as usize + 1;
        below < ROWS && (b.x..b.x + b.width).all(|x| reach.visited(x as usize, below))
    });
    coins && boxes
}

/// Too many surface columns taken by obstacles.
fn crowded(segment: &SegmentDescriptor, max_cover: f64) -> bool {
    let w = SEGMENT_WIDTH as usize;
    let mut gap = vec![false; w];
    for g in &segment.gaps {
        for c in g.x..g.x + g.width {
            gap[c as usize] = true;
        }
    }
    let surface = gap.iter().filter(|&&g| !g).count();
    if surface == 0 {
        return false;
    }
    let mut covered = vec![false; w];
    let mut cover = |x0: i32, width: i32| {
        for c in x0..x0 + width {
            covered[c as usize] = true;
        }
    };
    for t in &segment.tubes {
        cover(t.x, TUBE_WIDTH);
    }
    for c in &segment.cannons {
        cover(c.x, CANNON_WIDTH);
    }
    for e in &segment.enemies {
        cover(e.x, 1);
    }
    let ground = segment.ground_row();
    for b in segment.boxes.iter().filter(|b| b.y == ground - 1) {
        cover(b.x, b.width);
    }
    let n = (0..w).filter(|&c| covered[c] && !gap[c]).count();
    n as f64 > max_cover * surface as f64
}

/// Two box runs on different rows within the same three-column window.
fn stacked_boxes(segment: &SegmentDescriptor) -> bool {
    let b = &segment.boxes;
    b.iter().enumerate().any(|(i, p)| {
        b[i + 1..].iter().any(|q| p.y != q.y && (p.x - q.x).abs() <= 2)
    })
}

/// An enemy waiting on the first column after a gap.
fn enemy_at_gap_exit(segment: &SegmentDescriptor) -> bool {
    segment
        .enemies
        .iter()
        .any(|e| segment.gaps.iter().any(|g| e.x == g.x + g.width))
}
