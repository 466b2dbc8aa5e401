use std::fmt;

use serde::{Deserialize, Serialize};

use crate::content_space::{EnemyKind, SegmentDescriptor};
use crate::error::{Error, Result};

/// Thresholds for the leniency categories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeniencyBands {
    pub easy_max_enemies: usize,
    pub easy_max_gaps: usize,
    pub easy_max_gap_width: i32,
    pub hard_min_enemies: usize,
    pub hard_min_wide_gaps: usize,
    pub hard_wide_gap_width: i32,
    pub hard_min_cannons: usize,
}

impl Default for LeniencyBands {
    fn default() -> Self {
        LeniencyBands {
            easy_max_enemies: 1,
            easy_max_gaps: 1,
            easy_max_gap_width: 2,
            hard_min_enemies: 3,
            hard_min_wide_gaps: 2,
            hard_wide_gap_width: 3,
            hard_min_cannons: 2,
        }
    }
}

/// Relief is the tallest hill or tube/cannon stack above the platform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearityBands {
    pub smooth_max_relief: i32,
    pub rough_min_relief: i32,
}

impl Default for LinearityBands {
    fn default() -> Self {
        LinearityBands { smooth_max_relief: 2, rough_min_relief: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoryBands {
    pub leniency: LeniencyBands,
    pub linearity: LinearityBands,
    /// Hazard-score cut points between difficulty levels.
    pub difficulty_cuts: [f64; 4],
}

impl Default for CategoryBands {
    fn default() -> Self {
        CategoryBands {
            leniency: LeniencyBands::default(),
            linearity: LinearityBands::default(),
            difficulty_cuts: [2.0, 4.0, 6.0, 8.0],
        }
    }
}

/// Leniency, density and linearity category, each 1..=3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Categories {
    pub leniency: u8,
    pub density: u8,
    pub linearity: u8,
}

impl fmt::Display for Categories {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "leniency={} density={} linearity={}", self.leniency, self.density, self.linearity)
    }
}

pub(crate) fn check_category(name: &str, c: u8) -> Result<u8> {
    if (1..=3).contains(&c) {
        Ok(c)
    } else {
        Err(Error::InvalidArgument(format!("{name} category {c} outside 1..=3")))
    }
}

pub fn relief(s: &SegmentDescriptor) -> i32 {
    let hills = s.hills.iter().map(|h| h.height);
    let tubes = s.tubes.iter().map(|t| t.total_height());
    let cannons = s.cannons.iter().map(|c| c.total_height());
    hills.chain(tubes).chain(cannons).max().unwrap_or(0)
}

pub fn leniency_category(s: &SegmentDescriptor, b: &LeniencyBands) -> u8 {
    let wide = s.gaps.iter().filter(|g| g.width >= b.hard_wide_gap_width).count();
    if s.enemies.len() >= b.hard_min_enemies || wide >= b.hard_min_wide_gaps || s.cannons.len() >= b.hard_min_cannons {
        1
    } else if s.enemies.len() <= b.easy_max_enemies
        && s.gaps.len() <= b.easy_max_gaps
        && s.gaps.iter().all(|g| g.width <= b.easy_max_gap_width)
        && s.cannons.is_empty()
        && s.flower_tubes() == 0
    {
        3
    } else {
        2
    }
}

/// Hill spans overlap when they share at least one column.
pub fn hills_overlap(s: &SegmentDescriptor) -> bool {
    s.hills.iter().enumerate().any(|(i, a)| {
        s.hills[i + 1..].iter().any(|b| a.x < b.x + b.width && b.x < a.x + a.width)
    })
}

pub fn density_category(s: &SegmentDescriptor) -> u8 {
    match s.hills.len() {
        0 => 1,
        1 => 2,
        _ if hills_overlap(s) => 3,
        _ => 2,
    }
}

pub fn linearity_category(s: &SegmentDescriptor, b: &LinearityBands) -> u8 {
    let r = relief(s);
    if s.hills.is_empty() && r <= b.smooth_max_relief {
        3
    } else if r >= b.rough_min_relief {
        1
    } else {
        2
    }
}

/// Difficulty 1..=5. The ends are fixed by hazard counts; in between a
/// hazard score is cut into bands and clamped to 2..=4.
pub fn difficulty(s: &SegmentDescriptor, cuts: &[f64; 4]) -> u8 {
    let enemies = s.enemies.len();
    let cannons = s.cannons.len();
    let gaps = s.gaps.len();
    let flowers = s.flower_tubes();
    if enemies >= 2 && cannons >= 1 && gaps >= 1 {
        return 5;
    }
    if enemies <= 1 && s.enemies.iter().all(|e| e.kind == EnemyKind::Goomba) && flowers <= 1 && cannons == 0 && gaps == 0 {
        return 1;
    }
    let gap_width: i32 = s.gaps.iter().map(|g| g.width).sum();
    let score = enemies as f64 + 2.0 * cannons as f64 + f64::from(gap_width) / 2.0 + flowers as f64;
    let band = 1 + cuts.iter().filter(|&&c| score >= c).count() as u8;
    band.clamp(2, 4)
}

pub fn categorize(s: &SegmentDescriptor, bands: &CategoryBands) -> (Categories, u8) {
    let cats = Categories {
        leniency: leniency_category(s, &bands.leniency),
        density: density_category(s),
        linearity: linearity_category(s, &bands.linearity),
    };
    (cats, difficulty(s, &bands.difficulty_cuts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_space::*;

    #[test]
    fn flat_empty() {
        let (c, d) = categorize(&SegmentDescriptor::empty(3), &CategoryBands::default());
        assert_eq!(c, Categories { leniency: 3, density: 1, linearity: 3 });
        assert_eq!(d, 1);
    }

    #[test]
    fn difficulty_ends() {
        let cuts = CategoryBands::default().difficulty_cuts;
        let mut s = SegmentDescriptor::empty(3);
        s.enemies.push(Enemy { x: 4, y: 11, kind: EnemyKind::Goomba });
        assert_eq!(difficulty(&s, &cuts), 1);
        s.tubes.push(Tube { x: 10, y: 0, height: 2, w_before: 0, w_after: 0, kind: TubeKind::Flower });
        assert_eq!(difficulty(&s, &cuts), 1);
        s.enemies.push(Enemy { x: 14, y: 11, kind: EnemyKind::Goomba });
        s.cannons.push(Cannon { x: 17, y: 0, height: 1, w_before: 0, w_after: 0 });
        s.gaps.push(Gap { x: 6, width: 1, kind: GapKind::Plain });
        assert_eq!(difficulty(&s, &cuts), 5);
    }

    #[test]
    fn difficulty_middle_bands() {
        let cuts = CategoryBands::default().difficulty_cuts;
        let mut s = SegmentDescriptor::empty(3);
        s.enemies.push(Enemy { x: 4, y: 11, kind: EnemyKind::Spiky });
        // score 1 would band to 1, clamped to 2
        assert_eq!(difficulty(&s, &cuts), 2);
        for x in [6, 8, 10, 12] {
            s.enemies.push(Enemy { x, y: 11, kind: EnemyKind::Goomba });
        }
        // five enemies: score 5
        assert_eq!(difficulty(&s, &cuts), 3);
        s.cannons.push(Cannon { x: 17, y: 0, height: 1, w_before: 0, w_after: 0 });
        // score 7, no gap
        assert_eq!(difficulty(&s, &cuts), 4);
        s.cannons.push(Cannon { x: 15, y: 0, height: 1, w_before: 0, w_after: 0 });
        assert_eq!(difficulty(&s, &cuts), 4);
    }

    #[test]
    fn density_and_linearity_bands() {
        let b = CategoryBands::default();
        let mut s = SegmentDescriptor::empty(3);
        s.hills.push(Hill { x: 2, width: 4, height: 2 });
        assert_eq!(density_category(&s), 2);
        assert_eq!(linearity_category(&s, &b.linearity), 2);
        s.hills.push(Hill { x: 6, width: 4, height: 1 });
        assert_eq!(density_category(&s), 2);
        s.hills[1].x = 5;
        assert_eq!(density_category(&s), 3);
        s.hills[1].height = 4;
        assert_eq!(linearity_category(&s, &b.linearity), 1);

        let mut s = SegmentDescriptor::empty(3);
        s.tubes.push(Tube { x: 10, y: 1, height: 1, w_before: 0, w_after: 0, kind: TubeKind::Plain });
        assert_eq!(linearity_category(&s, &b.linearity), 3);
        s.tubes[0].y = 2;
        assert_eq!(linearity_category(&s, &b.linearity), 2);
    }

    #[test]
    fn leniency_bands() {
        let b = LeniencyBands::default();
        let mut s = SegmentDescriptor::empty(3);
        s.gaps.push(Gap { x: 3, width: 3, kind: GapKind::Plain });
        assert_eq!(leniency_category(&s, &b), 2);
        s.gaps.push(Gap { x: 10, width: 3, kind: GapKind::Plain });
        assert_eq!(leniency_category(&s, &b), 1);
        let mut s = SegmentDescriptor::empty(3);
        s.gaps.push(Gap { x: 3, width: 2, kind: GapKind::Plain });
        s.enemies.push(Enemy { x: 8, y: 11, kind: EnemyKind::KoopaRed });
        assert_eq!(leniency_category(&s, &b), 3);
    }
}
