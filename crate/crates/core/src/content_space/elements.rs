use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns in one segment.
pub const SEGMENT_WIDTH: i32 = 20;
/// Rows in every segment and level; row 0 is the top.
pub const SEGMENT_HEIGHT: i32 = 15;

/// Tubes are drawn two columns wide, cannons one.
pub const TUBE_WIDTH: i32 = 2;
pub const CANNON_WIDTH: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GapKind {
    Plain,
    Stepped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TubeKind {
    Plain,
    Flower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxKind {
    Coin,
    Powerup,
    Brick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnemyKind {
    Goomba,
    KoopaGreen,
    KoopaRed,
    Spiky,
}

/// Nominal attribute with a fixed, ordered set of values.
pub trait Nominal: Copy + Sized + 'static {
    const ALL: &'static [Self];
    const NAMES: &'static [&'static str];

    fn index(self) -> usize;

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn name(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Self::ALL[i])
    }
}

macro_rules! nominal {
    ($ty:ty, [$($v:ident => $n:literal),+ $(,)?]) => {
        impl Nominal for $ty {
            const ALL: &'static [Self] = &[$(<$ty>::$v),+];
            const NAMES: &'static [&'static str] = &[$($n),+];
            fn index(self) -> usize {
                self as usize
            }
        }
    };
}

nominal!(GapKind, [Plain => "plain", Stepped => "stepped"]);
nominal!(TubeKind, [Plain => "plain", Flower => "flower"]);
nominal!(BoxKind, [Coin => "coin_box", Powerup => "powerup_box", Brick => "brick"]);
nominal!(EnemyKind, [
    Goomba => "goomba",
    KoopaGreen => "koopa_green",
    KoopaRed => "koopa_red",
    Spiky => "spiky",
]);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gap {
    pub x: i32,
    pub width: i32,
    pub kind: GapKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Hill {
    pub x: i32,
    pub width: i32,
    pub height: i32,
}

/// `y` is the pedestal: tiles of support between the platform and the barrel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cannon {
    pub x: i32,
    pub y: i32,
    pub height: i32,
    pub w_before: i32,
    pub w_after: i32,
}

/// `y` is the pedestal below the pipe, as for cannons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tube {
    pub x: i32,
    pub y: i32,
    pub height: i32,
    pub w_before: i32,
    pub w_after: i32,
    pub kind: TubeKind,
}

/// `y` is a grid row (0 = top).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoxRun {
    pub x: i32,
    pub y: i32,
    pub width: i32,
    pub kind: BoxKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Enemy {
    pub x: i32,
    pub y: i32,
    pub kind: EnemyKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoinRun {
    pub x: i32,
    pub y: i32,
    pub width: i32,
}

impl Tube {
    /// Total stack height above the platform, pedestal included.
    pub fn total_height(&self) -> i32 {
        self.y + self.height
    }
}

impl Cannon {
    pub fn total_height(&self) -> i32 {
        self.y + self.height
    }
}

/// Maximum number of each element type in a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementCaps {
    pub gaps: usize,
    pub hills: usize,
    pub cannons: usize,
    pub tubes: usize,
    pub boxes: usize,
    pub enemies: usize,
    pub coins: usize,
}

impl ElementCaps {
    /// The tailored content-space maxima.
    pub const MAX: ElementCaps = ElementCaps {
        gaps: 3,
        hills: 2,
        cannons: 3,
        tubes: 3,
        boxes: 2,
        enemies: 5,
        coins: 2,
    };

    pub fn within(&self, bound: &ElementCaps) -> bool {
        self.gaps <= bound.gaps
            && self.hills <= bound.hills
            && self.cannons <= bound.cannons
            && self.tubes <= bound.tubes
            && self.boxes <= bound.boxes
            && self.enemies <= bound.enemies
            && self.coins <= bound.coins
    }
}

impl Default for ElementCaps {
    fn default() -> Self {
        Self::MAX
    }
}

/// One 20x15 game segment as typed design elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SegmentDescriptor {
    pub platform_height: i32,
    pub gaps: Vec<Gap>,
    pub hills: Vec<Hill>,
    pub cannons: Vec<Cannon>,
    pub tubes: Vec<Tube>,
    pub boxes: Vec<BoxRun>,
    pub enemies: Vec<Enemy>,
    pub coins: Vec<CoinRun>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Gap,
    Hill,
    Cannon,
    Tube,
    Box,
    Enemy,
    Coin,
}

impl ElementKind {
    pub fn tag(self) -> &'static str {
        match self {
            ElementKind::Gap => "GAP",
            ElementKind::Hill => "HILL",
            ElementKind::Cannon => "CANNON",
            ElementKind::Tube => "TUBE",
            ElementKind::Box => "BOX",
            ElementKind::Enemy => "ENEMY",
            ElementKind::Coin => "COIN",
        }
    }

    fn label(self) -> &'static str {
        match self {
            ElementKind::Gap => "gap",
            ElementKind::Hill => "hill",
            ElementKind::Cannon => "cannon",
            ElementKind::Tube => "tube",
            ElementKind::Box => "box",
            ElementKind::Enemy => "enemy",
            ElementKind::Coin => "coin",
        }
    }
}

/// Identifies an element by type and its index in the canonical list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementRef {
    pub kind: ElementKind,
    pub index: usize,
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.kind.label(), self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    Gap(Gap),
    Hill(Hill),
    Cannon(Cannon),
    Tube(Tube),
    Box(BoxRun),
    Enemy(Enemy),
    Coin(CoinRun),
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Gap(_) => ElementKind::Gap,
            Element::Hill(_) => ElementKind::Hill,
            Element::Cannon(_) => ElementKind::Cannon,
            Element::Tube(_) => ElementKind::Tube,
            Element::Box(_) => ElementKind::Box,
            Element::Enemy(_) => ElementKind::Enemy,
            Element::Coin(_) => ElementKind::Coin,
        }
    }
}

impl SegmentDescriptor {
    /// A segment with nothing but the platform.
    pub fn empty(platform_height: i32) -> Self {
        SegmentDescriptor {
            platform_height,
            gaps: Vec::new(),
            hills: Vec::new(),
            cannons: Vec::new(),
            tubes: Vec::new(),
            boxes: Vec::new(),
            enemies: Vec::new(),
            coins: Vec::new(),
        }
    }

    /// First solid row of the platform.
    pub fn ground_row(&self) -> i32 {
        SEGMENT_HEIGHT - self.platform_height
    }

    pub fn counts(&self) -> ElementCaps {
        ElementCaps {
            gaps: self.gaps.len(),
            hills: self.hills.len(),
            cannons: self.cannons.len(),
            tubes: self.tubes.len(),
            boxes: self.boxes.len(),
            enemies: self.enemies.len(),
            coins: self.coins.len(),
        }
    }

    pub fn element_count(&self) -> usize {
        let c = self.counts();
        c.gaps + c.hills + c.cannons + c.tubes + c.boxes + c.enemies + c.coins
    }

    /// All elements in canonical list order (Table order of element types).
    pub fn elements(&self) -> Vec<(ElementRef, Element)> {
        let mut out = Vec::with_capacity(self.element_count());
        let mut push = |kind, i, e| out.push((ElementRef { kind, index: i }, e));
        for (i, e) in self.gaps.iter().enumerate() {
            push(ElementKind::Gap, i, Element::Gap(*e));
        }
        for (i, e) in self.hills.iter().enumerate() {
            push(ElementKind::Hill, i, Element::Hill(*e));
        }
        for (i, e) in self.cannons.iter().enumerate() {
            push(ElementKind::Cannon, i, Element::Cannon(*e));
        }
        for (i, e) in self.tubes.iter().enumerate() {
            push(ElementKind::Tube, i, Element::Tube(*e));
        }
        for (i, e) in self.boxes.iter().enumerate() {
            push(ElementKind::Box, i, Element::Box(*e));
        }
        for (i, e) in self.enemies.iter().enumerate() {
            push(ElementKind::Enemy, i, Element::Enemy(*e));
        }
        for (i, e) in self.coins.iter().enumerate() {
            push(ElementKind::Coin, i, Element::Coin(*e));
        }
        out
    }

    pub fn check_caps(&self, caps: &ElementCaps) -> Result<()> {
        let c = self.counts();
        let rows = [
            ("gap", c.gaps, caps.gaps),
            ("hill", c.hills, caps.hills),
            ("cannon", c.cannons, caps.cannons),
            ("tube", c.tubes, caps.tubes),
            ("box", c.boxes, caps.boxes),
            ("enemy", c.enemies, caps.enemies),
            ("coin", c.coins, caps.coins),
        ];
        for (kind, count, cap) in rows {
            if count > cap {
                return Err(Error::CapExceeded { kind, count, cap });
            }
        }
        Ok(())
    }

    /// Structural validity: caps, coordinate bounds and spans inside the grid.
    pub fn validate(&self) -> Result<()> {
        self.check_caps(&ElementCaps::MAX)?;
        let bad = |what: String| Err(Error::InvalidSegment(what));
        if !(1..=7).contains(&self.platform_height) {
            return bad(format!("platform_height {} outside 1..=7", self.platform_height));
        }
        let g = self.ground_row();
        let cols = |x: i32, w: i32| x >= 0 && w >= 1 && x + w <= SEGMENT_WIDTH;
        let row = |y: i32| (0..SEGMENT_HEIGHT).contains(&y);
        for e in &self.gaps {
            if !cols(e.x, e.width) {
                return bad(format!("gap at x={} width={} leaves the segment", e.x, e.width));
            }
        }
        for e in &self.hills {
            if !cols(e.x, e.width) || e.height < 1 || g - e.height < 0 {
                return bad(format!("hill at x={} does not fit", e.x));
            }
        }
        for e in &self.cannons {
            if !cols(e.x - e.w_before, CANNON_WIDTH + e.w_before + e.w_after)
                || e.w_before < 0
                || e.w_after < 0
                || e.height < 1
                || !row(e.y)
                || g - e.total_height() < 0
            {
                return bad(format!("cannon at x={} does not fit", e.x));
            }
        }
        for e in &self.tubes {
            if !cols(e.x - e.w_before, TUBE_WIDTH + e.w_before + e.w_after)
                || e.w_before < 0
                || e.w_after < 0
                || e.height < 1
                || !row(e.y)
                || g - e.total_height() < 0
            {
                return bad(format!("tube at x={} does not fit", e.x));
            }
        }
        // loose items sit above the platform surface
        let above = |y: i32| (0..g).contains(&y);
        for e in &self.boxes {
            if !cols(e.x, e.width) || !above(e.y) {
                return bad(format!("box run at x={} does not fit", e.x));
            }
        }
        for e in &self.enemies {
            if !cols(e.x, 1) || !above(e.y) {
                return bad(format!("enemy at x={} does not fit", e.x));
            }
        }
        for e in &self.coins {
            if !cols(e.x, e.width) || !above(e.y) {
                return bad(format!("coin run at x={} does not fit", e.x));
            }
        }
        Ok(())
    }

    /// Sorts every element list by decreasing x with a total tie-break
    /// (y descending, then type index, then remaining attributes ascending).
    pub fn canonicalize(&self) -> Result<SegmentDescriptor> {
        self.check_caps(&ElementCaps::MAX)?;
        let mut s = self.clone();
        s.canonicalize_in_place();
        Ok(s)
    }

    pub(crate) fn canonicalize_in_place(&mut self) {
        self.gaps
            .sort_by_key(|e| (Reverse(e.x), e.kind.index(), e.width));
        self.hills
            .sort_by_key(|e| (Reverse(e.x), e.width, e.height));
        self.cannons
            .sort_by_key(|e| (Reverse(e.x), Reverse(e.y), e.height, e.w_before, e.w_after));
        self.tubes.sort_by_key(|e| {
            (Reverse(e.x), Reverse(e.y), e.kind.index(), e.height, e.w_before, e.w_after)
        });
        self.boxes
            .sort_by_key(|e| (Reverse(e.x), Reverse(e.y), e.kind.index(), e.width));
        self.enemies
            .sort_by_key(|e| (Reverse(e.x), Reverse(e.y), e.kind.index()));
        self.coins
            .sort_by_key(|e| (Reverse(e.x), Reverse(e.y), e.width));
    }

    pub fn is_canonical(&self) -> bool {
        let mut s = self.clone();
        s.canonicalize_in_place();
        s == *self
    }

    pub fn flower_tubes(&self) -> usize {
        self.tubes.iter().filter(|t| t.kind == TubeKind::Flower).count()
    }

    /// Number of powerup box tiles.
    pub fn powerup_boxes(&self) -> usize {
        self.boxes
            .iter()
            .filter(|b| b.kind == BoxKind::Powerup)
            .map(|b| b.width as usize)
            .sum()
    }
}
