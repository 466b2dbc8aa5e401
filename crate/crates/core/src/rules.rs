//! Rule-based conflict detection over element extents.

use std::fmt;

use crate::content_space::*;

/// Inclusive column/row rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub col0: i32,
    pub col1: i32,
    pub row0: i32,
    pub row1: i32,
}

impl Rect {
    pub fn intersects(&self, o: &Rect) -> bool {
        self.col0 <= o.col1 && o.col0 <= self.col1 && self.row0 <= o.row1 && o.row0 <= self.row1
    }

    fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (self.row0..=self.row1).flat_map(move |r| (self.col0..=self.col1).map(move |c| (c, r)))
    }
}

/// Cells an element occupies plus its clear margins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Footprint {
    pub body: Rect,
    pub margins: Vec<Rect>,
}

fn span(x: i32, width: i32, row0: i32, row1: i32) -> Rect {
    Rect { col0: x, col1: x + width - 1, row0, row1 }
}

fn stacked(x: i32, width: i32, total: i32, w_before: i32, w_after: i32, ground: i32) -> Footprint {
    let (row0, row1) = (ground - total, ground - 1);
    let mut margins = Vec::new();
    if w_before > 0 {
        margins.push(span(x - w_before, w_before, row0, row1));
    }
    if w_after > 0 {
        margins.push(span(x + width, w_after, row0, row1));
    }
    Footprint { body: span(x, width, row0, row1), margins }
}

/// Body and margins of an element in a segment with the given platform height.
pub fn footprint(element: &Element, platform_height: i32) -> Footprint {
    let ground = SEGMENT_HEIGHT - platform_height;
    let plain = |body| Footprint { body, margins: Vec::new() };
    match element {
        Element::Gap(e) => plain(span(e.x, e.width, 0, SEGMENT_HEIGHT - 1)),
        Element::Hill(e) => plain(span(e.x, e.width, ground - e.height, ground - 1)),
        Element::Cannon(e) => stacked(e.x, CANNON_WIDTH, e.total_height(), e.w_before, e.w_after, ground),
        Element::Tube(e) => stacked(e.x, TUBE_WIDTH, e.total_height(), e.w_before, e.w_after, ground),
        Element::Box(e) => plain(span(e.x, e.width, e.y, e.y)),
        // an enemy falls from its cell down to the platform
        Element::Enemy(e) => plain(span(e.x, 1, e.y, ground - 1)),
        Element::Coin(e) => plain(span(e.x, e.width, e.y, e.y)),
    }
}

/// Bounding rectangle of an element, margins included.
pub fn element_extent(element: &Element, platform_height: i32) -> Rect {
    let fp = footprint(element, platform_height);
    fp.margins.iter().fold(fp.body, |acc, m| Rect {
        col0: acc.col0.min(m.col0),
        col1: acc.col1.max(m.col1),
        row0: acc.row0.min(m.row0),
        row1: acc.row1.max(m.row1),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    /// Two element bodies share a cell.
    ColumnOverlap,
    /// A clear margin covers another element's body.
    MarginOverlap,
    /// Gaps overlap or touch, merging into one wider gap.
    GapTouch,
    /// An enemy would fall into a gap.
    EnemyInGap,
    /// A coin or box run cuts through a hill.
    HillBody,
}

impl ConflictKind {
    pub fn name(self) -> &'static str {
        match self {
            ConflictKind::ColumnOverlap => "column_overlap",
            ConflictKind::MarginOverlap => "margin_overlap",
            ConflictKind::GapTouch => "gap_touch",
            ConflictKind::EnemyInGap => "enemy_in_gap",
            ConflictKind::HillBody => "hill_body",
        }
    }
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conflict {
    pub a: ElementRef,
    pub b: ElementRef,
    pub kind: ConflictKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictReport {
    /// Sorted by element pair; each unordered pair appears at most once.
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn is_clean(&self) -> bool {
        self.conflicts.is_empty()
    }

    /// Diagnostic lines, one per conflict.
    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.conflicts
            .iter()
            .map(|c| format!("CONFLICT {} {} {}", c.kind, c.a, c.b))
    }

    pub fn summary(&self) -> String {
        self.lines().collect::<Vec<_>>().join("; ")
    }
}

/// Kind reported when the bodies of `a` and `b` intersect, if any.
fn body_conflict(a: ElementKind, b: ElementKind) -> Option<ConflictKind> {
    use ElementKind::*;
    let pair = |x, y| (a == x && b == y) || (a == y && b == x);
    if a == Hill && b == Hill {
        None
    } else if a == Gap && b == Gap {
        Some(ConflictKind::GapTouch)
    } else if pair(Enemy, Gap) {
        Some(ConflictKind::EnemyInGap)
    } else if pair(Box, Hill) || pair(Coin, Hill) {
        Some(ConflictKind::HillBody)
    } else {
        Some(ConflictKind::ColumnOverlap)
    }
}

const W: usize = SEGMENT_WIDTH as usize;
const H: usize = SEGMENT_HEIGHT as usize;

/// Reports every conflicting element pair. Works on a cell raster of element
/// bitmasks, so the cost is linear in covered cells.
pub fn check_conflicts(segment: &SegmentDescriptor) -> ConflictReport {
    let elements = segment.elements();
    debug_assert!(elements.len() <= 32);
    let mut body = [[0u32; W]; H];
    let mut margin = [[0u32; W]; H];
    // columns immediately beside each gap, for the touching rule
    let mut gap_halo = [0u32; W];
    let mut gap_cols = [0u32; W];

    let mark = |grid: &mut [[u32; W]; H], rect: &Rect, bit: u32| {
        for (c, r) in rect.cells() {
            if (0..W as i32).contains(&c) && (0..H as i32).contains(&r) {
                grid[r as usize][c as usize] |= bit;
            }
        }
    };
    for (i, (_, e)) in elements.iter().enumerate() {
        let bit = 1u32 << i;
        let fp = footprint(e, segment.platform_height);
        mark(&mut body, &fp.body, bit);
        for m in &fp.margins {
            mark(&mut margin, m, bit);
        }
        if let Element::Gap(g) = e {
            for c in g.x..g.x + g.width {
                gap_cols[c as usize] |= bit;
            }
            for c in [g.x - 1, g.x + g.width] {
                if (0..W as i32).contains(&c) {
                    gap_halo[c as usize] |= bit;
                }
            }
        }
    }

    let n = elements.len();
    let mut overlap = vec![0u32; n];
    let mut margin_hit = vec![0u32; n];
    for r in 0..H {
        for c in 0..W {
            let b = body[r][c];
            let m = margin[r][c];
            for i in bits(b) {
                overlap[i] |= b & !(1 << i);
            }
            for i in bits(m) {
                // margin of i over the body of another element, either direction
                let others = b & !(1 << i);
                margin_hit[i] |= others;
                for j in bits(others) {
                    margin_hit[j] |= 1 << i;
                }
            }
        }
    }
    let mut touching = vec![0u32; n];
    for c in 0..W {
        for i in bits(gap_halo[c]) {
            touching[i] |= gap_cols[c];
            for j in bits(gap_cols[c]) {
                touching[j] |= 1 << i;
            }
        }
    }

    let mut conflicts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (ra, ea) = elements[i];
            let (rb, eb) = elements[j];
            let kind = if overlap[i] & (1 << j) != 0 {
                body_conflict(ea.kind(), eb.kind())
            } else if touching[i] & (1 << j) != 0 {
                Some(ConflictKind::GapTouch)
            } else if margin_hit[i] & (1 << j) != 0 {
                Some(ConflictKind::MarginOverlap)
            } else {
                None
            };
            if let Some(kind) = kind {
                conflicts.push(Conflict { a: ra, b: rb, kind });
            }
        }
    }
    ConflictReport { conflicts }
}

fn bits(mut m: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn is_clean(segment: &SegmentDescriptor) -> bool {
    check_conflicts(segment).is_clean()
}

/// Keeps the conflict-free segments, preserving order.
pub fn filter_pool(segments: &[SegmentDescriptor]) -> Vec<SegmentDescriptor> {
    segments.iter().filter(|s| is_clean(s)).cloned().collect()
}
