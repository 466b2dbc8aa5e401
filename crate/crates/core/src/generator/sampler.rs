//! Target-biased candidate sampling. Counts are drawn so that the requested
//! categories are likely; elements are then placed one at a time, each
//! retried until it does not conflict with what is already there.

use rand::seq::SliceRandom;
use rand::Rng;

use super::categorize::{difficulty, leniency_category, CategoryBands};
use crate::content_space::*;
use crate::rules;

/// Category constraints for one constructive primitive. `None` leaves a
/// dimension free.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CpTarget {
    pub leniency: Option<u8>,
    pub density: Option<u8>,
    pub linearity: Option<u8>,
    pub difficulty: Option<u8>,
    pub platform_height: Option<i32>,
}

impl CpTarget {
    pub fn describe(&self) -> String {
        let f = |v: Option<u8>| v.map_or("any".to_string(), |v| v.to_string());
        format!(
            "leniency={} density={} linearity={} difficulty={} platform_height={}",
            f(self.leniency),
            f(self.density),
            f(self.linearity),
            f(self.difficulty),
            self.platform_height.map_or("any".to_string(), |h| h.to_string()),
        )
    }

    /// Density 2 or 3 needs hills, which smooth linearity forbids; density
    /// wins and linearity 3 is then met by low relief alone.
    pub(crate) fn density_overrides(&self) -> bool {
        self.linearity == Some(3) && self.density.is_some_and(|d| d >= 2)
    }
}

struct Plan {
    gap_widths: Vec<i32>,
    hill_heights: Vec<i32>,
    hills_overlap: Option<bool>,
    /// Pedestal plus barrel, one entry per stack; cannons first.
    cannon_totals: Vec<i32>,
    tube_totals: Vec<i32>,
    tube_kinds: Vec<TubeKind>,
    enemies: Vec<EnemyKind>,
    boxes: usize,
    coins: usize,
}

fn range_count<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi.max(lo))
}

#[allow(clippy::too_many_lines)]
fn plan<R: Rng + ?Sized>(rng: &mut R, t: &CpTarget, r: &AttributeRanges, b: &CategoryBands, max_gap: i32) -> Plan {
    let caps = ElementCaps::MAX;
    let lb = &b.leniency;
    let gap_hi = r.gap_width.1.min(max_gap);
    let gap_range = (r.gap_width.0, gap_hi);

    let mut n_gaps = range_count(rng, 0, 2);
    let mut n_cannons = range_count(rng, 0, 1);
    let mut n_enemies = range_count(rng, 0, 3);
    let mut widths = None;
    let mut flowers_allowed = true;
    let mut goomba_only = false;

    match t.leniency {
        Some(3) => {
            n_enemies = range_count(rng, 0, lb.easy_max_enemies);
            n_gaps = range_count(rng, 0, lb.easy_max_gaps);
            widths = Some((gap_range.0, gap_hi.min(lb.easy_max_gap_width)));
            n_cannons = 0;
            flowers_allowed = false;
        }
        Some(1) => match rng.random_range(0..3) {
            0 => n_enemies = range_count(rng, lb.hard_min_enemies, caps.enemies),
            1 => {
                n_gaps = range_count(rng, lb.hard_min_wide_gaps, caps.gaps);
                widths = Some((lb.hard_wide_gap_width.max(gap_range.0), gap_hi));
            }
            _ => n_cannons = range_count(rng, lb.hard_min_cannons, caps.cannons),
        },
        _ => {}
    }
    match t.difficulty {
        Some(1) => {
            n_enemies = n_enemies.min(1);
            goomba_only = true;
            n_cannons = 0;
            n_gaps = 0;
        }
        Some(5) => {
            n_enemies = n_enemies.max(range_count(rng, 2, 3));
            n_cannons = n_cannons.max(1);
            n_gaps = n_gaps.max(1);
        }
        _ => {}
    }
    let gap_widths = (0..n_gaps).map(|_| pick(rng, widths.unwrap_or(gap_range))).collect();

    let n_hills = match t.density {
        Some(1) => 0,
        Some(2) => 1 + usize::from(rng.random_bool(0.25)),
        Some(3) => 2,
        _ if t.linearity == Some(3) => 0,
        _ => range_count(rng, 0, caps.hills),
    };
    let hills_overlap = match t.density {
        Some(2) => Some(false),
        Some(3) => Some(true),
        _ => None,
    };

    let n_tubes = range_count(rng, 0, 2);
    let stack_max = r.pedestal.1 + r.stack_height.1;
    let lin = &b.linearity;
    // relief bounds for hills and stacks
    let (hill_hi, stack_hi) = match t.linearity {
        Some(3) => (lin.smooth_max_relief, lin.smooth_max_relief),
        Some(2) => (lin.rough_min_relief - 1, lin.rough_min_relief - 1),
        _ => (r.hill_height.1, stack_max),
    };
    let hill_lo = r.hill_height.0;
    let stack_lo = r.stack_height.0 + r.pedestal.0;
    let mut hill_heights: Vec<i32> = (0..n_hills).map(|_| pick(rng, (hill_lo, hill_hi.max(hill_lo)))).collect();
    let mut cannon_totals: Vec<i32> = (0..n_cannons).map(|_| pick(rng, (stack_lo, stack_hi.max(stack_lo)))).collect();
    let mut tube_totals: Vec<i32> = (0..n_tubes).map(|_| pick(rng, (stack_lo, stack_hi.max(stack_lo)))).collect();

    // one element carries the relief that defines rough or medium linearity
    let need = match t.linearity {
        Some(1) => Some(lin.rough_min_relief),
        Some(2) if hill_heights.is_empty() => Some(lin.smooth_max_relief + 1),
        _ => None,
    };
    if let Some(need) = need {
        if let Some(h) = hill_heights.first_mut() {
            let hi = r.hill_height.1.max(need);
            *h = pick(rng, (need, if t.linearity == Some(1) { hi } else { need }));
        } else if let Some(c) = cannon_totals.first_mut() {
            *c = if t.linearity == Some(1) { pick(rng, (need, stack_max.max(need))) } else { need };
        } else {
            let v = if t.linearity == Some(1) { pick(rng, (need, stack_max.max(need))) } else { need };
            match tube_totals.first_mut() {
                Some(s) => *s = v,
                None => tube_totals.push(v),
            }
        }
    }
    hill_heights.shuffle(rng);

    let tube_kinds = tube_totals
        .iter()
        .map(|_| if flowers_allowed { pick_nominal(rng) } else { TubeKind::Plain })
        .collect();
    let enemies = (0..n_enemies)
        .map(|_| if goomba_only { EnemyKind::Goomba } else { pick_nominal(rng) })
        .collect();

    Plan {
        gap_widths,
        hill_heights,
        hills_overlap,
        cannon_totals,
        tube_totals,
        tube_kinds,
        enemies,
        boxes: range_count(rng, 0, caps.boxes),
        coins: range_count(rng, 0, caps.coins),
    }
}

fn split_stack<R: Rng + ?Sized>(rng: &mut R, total: i32, r: &AttributeRanges) -> (i32, i32) {
    let lo = r.pedestal.0.max(total - r.stack_height.1);
    let hi = r.pedestal.1.min(total - r.stack_height.0);
    let y = if lo <= hi { rng.random_range(lo..=hi) } else { lo.max(0) };
    (y, total - y)
}

/// Tries a placement up to `tries` times; false when every try conflicted.
fn place<R: Rng + ?Sized>(
    rng: &mut R,
    seg: &mut SegmentDescriptor,
    tries: usize,
    mut add: impl FnMut(&mut R, &mut SegmentDescriptor),
    mut undo: impl FnMut(&mut SegmentDescriptor),
) -> bool {
    for _ in 0..tries {
        add(rng, seg);
        if seg.validate().is_ok() && rules::is_clean(seg) {
            return true;
        }
        undo(seg);
    }
    false
}

const PLACE_TRIES: usize = 12;

/// One candidate, or `None` when the plan already misses the target or an
/// element could not be placed.
pub(crate) fn candidate<R: Rng + ?Sized>(
    rng: &mut R,
    t: &CpTarget,
    r: &AttributeRanges,
    b: &CategoryBands,
    max_gap: i32,
) -> Option<SegmentDescriptor> {
    let p = plan(rng, t, r, b, max_gap);
    let ph = t.platform_height.unwrap_or_else(|| pick(rng, r.platform_height));
    let mut seg = SegmentDescriptor::empty(ph);
    let g = seg.ground_row();

    // cheap check on counts alone; positions do not affect these
    {
        let mut probe = SegmentDescriptor::empty(ph);
        probe.gaps = p.gap_widths.iter().map(|&width| Gap { x: 0, width, kind: GapKind::Plain }).collect();
        probe.cannons = p.cannon_totals.iter().map(|&h| Cannon { x: 0, y: 0, height: h, w_before: 0, w_after: 0 }).collect();
        probe.tubes = p
            .tube_kinds
            .iter()
            .map(|&kind| Tube { x: 0, y: 0, height: 1, w_before: 0, w_after: 0, kind })
            .collect();
        probe.enemies = p.enemies.iter().map(|&kind| Enemy { x: 0, y: 0, kind }).collect();
        if t.leniency.is_some_and(|c| leniency_category(&probe, &b.leniency) != c)
            || t.difficulty.is_some_and(|d| difficulty(&probe, &b.difficulty_cuts) != d)
        {
            return None;
        }
    }

    let w = SEGMENT_WIDTH;
    for &width in &p.gap_widths {
        let kind = pick_nominal(rng);
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| s.gaps.push(Gap { x: rng.random_range(1..=w - 1 - width), width, kind }),
            |s| {
                s.gaps.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    for (i, &height) in p.hill_heights.iter().enumerate() {
        let width = pick(rng, r.hill_width);
        let first = seg.hills.first().copied();
        let overlap = p.hills_overlap;
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let x = match (i, first, overlap) {
                    (1, Some(h), Some(true)) => {
                        // share at least one column with the first hill
                        let lo = (h.x - width + 1).max(0);
                        let hi = (h.x + h.width - 1).min(w - width);
                        rng.random_range(lo..=hi.max(lo))
                    }
                    _ => rng.random_range(0..=w - width),
                };
                s.hills.push(Hill { x, width, height });
            },
            |s| {
                s.hills.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    if p.hills_overlap == Some(false) && super::categorize::hills_overlap(&seg) {
        return None;
    }
    for &total in &p.cannon_totals {
        let (y, height) = split_stack(rng, total, r);
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let w_before = pick(rng, r.margin);
                let w_after = pick(rng, r.margin);
                let hi = w - CANNON_WIDTH - w_after;
                let x = rng.random_range(w_before..=hi.max(w_before));
                s.cannons.push(Cannon { x, y, height, w_before, w_after });
            },
            |s| {
                s.cannons.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    for (&total, &kind) in p.tube_totals.iter().zip(&p.tube_kinds) {
        let (y, height) = split_stack(rng, total, r);
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let w_before = pick(rng, r.margin);
                let w_after = pick(rng, r.margin);
                let hi = w - TUBE_WIDTH - w_after;
                let x = rng.random_range(w_before..=hi.max(w_before));
                s.tubes.push(Tube { x, y, height, w_before, w_after, kind });
            },
            |s| {
                s.tubes.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    for &kind in &p.enemies {
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let y = row_at_elevation(g, pick(rng, r.elevation));
                s.enemies.push(Enemy { x: rng.random_range(0..w), y, kind });
            },
            |s| {
                s.enemies.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    // boxes need a cell below them to be hit from
    let box_elevation = (r.elevation.0.max(1), r.elevation.1.max(1));
    for _ in 0..p.boxes {
        let width = pick(rng, r.box_width);
        let kind = pick_nominal(rng);
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let y = row_at_elevation(g, pick(rng, box_elevation));
                s.boxes.push(BoxRun { x: rng.random_range(0..=w - width), y, width, kind });
            },
            |s| {
                s.boxes.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    for _ in 0..p.coins {
        let width = pick(rng, r.coin_width);
        let ok = place(
            rng,
            &mut seg,
            PLACE_TRIES,
            |rng, s| {
                let y = row_at_elevation(g, pick(rng, r.elevation));
                s.coins.push(CoinRun { x: rng.random_range(0..=w - width), y, width });
            },
            |s| {
                s.coins.pop();
            },
        );
        if !ok {
            return None;
        }
    }
    seg.canonicalize_in_place();
    Some(seg)
}
