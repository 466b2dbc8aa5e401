//! 85-slot feature encoding of a segment, in design-element table order.

use super::elements::*;
use super::sampling::AttributeRanges;
use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 85;

/// Value stored in the slots of absent elements. No valid attribute is negative.
pub const ABSENT: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Ordinal,
    Nominal,
}

/// What a slot holds, used for range lookup and report descriptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attr {
    PlatformHeight,
    Count(ElementKind),
    X,
    Y,
    /// Row-valued y of boxes, enemies and coins.
    Row,
    Width(ElementKind),
    Height(ElementKind),
    WBefore,
    WAfter,
    Type(ElementKind),
}

#[derive(Clone, Copy, Debug)]
pub struct Slot {
    pub kind: SlotKind,
    pub attr: Attr,
    pub element: Option<(ElementKind, usize)>,
}

const ORDINALS: [&str; 5] = ["first", "second", "third", "fourth", "fifth"];

fn layout() -> Vec<Slot> {
    use Attr::*;
    use ElementKind as K;
    let mut v = Vec::with_capacity(FEATURE_COUNT);
    let ord = |attr| Slot { kind: SlotKind::Ordinal, attr, element: None };
    v.push(ord(PlatformHeight));
    let groups: [(K, usize, Vec<Attr>); 7] = [
        (K::Gap, 3, vec![X, Width(K::Gap), Type(K::Gap)]),
        (K::Hill, 2, vec![X, Width(K::Hill), Height(K::Hill)]),
        (K::Cannon, 3, vec![X, Y, Height(K::Cannon), WBefore, WAfter]),
        (K::Tube, 3, vec![X, Y, Height(K::Tube), WBefore, WAfter, Type(K::Tube)]),
        (K::Box, 2, vec![X, Row, Width(K::Box), Type(K::Box)]),
        (K::Enemy, 5, vec![X, Row, Type(K::Enemy)]),
        (K::Coin, 2, vec![X, Row, Width(K::Coin)]),
    ];
    for (kind, cap, attrs) in groups {
        v.push(ord(Count(kind)));
        for i in 0..cap {
            for &attr in &attrs {
                let sk = match attr {
                    Type(_) => SlotKind::Nominal,
                    _ => SlotKind::Ordinal,
                };
                v.push(Slot { kind: sk, attr, element: Some((kind, i)) });
            }
        }
    }
    assert_eq!(v.len(), FEATURE_COUNT);
    v
}

pub fn slots() -> &'static [Slot] {
    static SLOTS: std::sync::OnceLock<Vec<Slot>> = std::sync::OnceLock::new();
    SLOTS.get_or_init(layout)
}

pub fn slot_kind(i: usize) -> SlotKind {
    slots()[i].kind
}

/// Number of categories of a nominal slot.
pub fn nominal_arity(attr: Attr) -> usize {
    match attr {
        Attr::Type(ElementKind::Gap) => GapKind::ALL.len(),
        Attr::Type(ElementKind::Tube) => TubeKind::ALL.len(),
        Attr::Type(ElementKind::Box) => BoxKind::ALL.len(),
        Attr::Type(ElementKind::Enemy) => EnemyKind::ALL.len(),
        _ => 0,
    }
}

fn kind_word(k: ElementKind) -> &'static str {
    match k {
        ElementKind::Gap => "gap",
        ElementKind::Hill => "hill",
        ElementKind::Cannon => "cannon",
        ElementKind::Tube => "tube",
        ElementKind::Box => "boxes",
        ElementKind::Enemy => "enemy",
        ElementKind::Coin => "coins",
    }
}

/// Human-readable description of slot `i` (0-based), e.g. "x of the first gap".
pub fn slot_description(i: usize) -> String {
    let s = slots()[i];
    let attr = match s.attr {
        Attr::PlatformHeight => return "height of initial platform".to_string(),
        Attr::Count(k) => {
            let plural = match k {
                ElementKind::Box => "boxes",
                ElementKind::Coin => "coins",
                ElementKind::Enemy => "enemies",
                other => return format!("number of {}s", kind_word(other)),
            };
            return format!("number of {plural}");
        }
        Attr::X => "x",
        Attr::Y | Attr::Row => "y",
        Attr::Width(_) => "width",
        Attr::Height(_) => "height",
        Attr::WBefore => "w_before",
        Attr::WAfter => "w_after",
        Attr::Type(_) => "type",
    };
    let (k, n) = s.element.expect("element slot");
    format!("{attr} of the {} {}", ORDINALS[n], kind_word(k))
}

/// Bounds (lo, hi) of an ordinal slot under the given attribute ranges.
pub fn slot_bounds(i: usize, r: &AttributeRanges) -> (f64, f64) {
    let caps = ElementCaps::MAX;
    let b = |(lo, hi): (i32, i32)| (f64::from(lo), f64::from(hi));
    match slots()[i].attr {
        Attr::PlatformHeight => b(r.platform_height),
        Attr::Count(k) => {
            let cap = match k {
                ElementKind::Gap => caps.gaps,
                ElementKind::Hill => caps.hills,
                ElementKind::Cannon => caps.cannons,
                ElementKind::Tube => caps.tubes,
                ElementKind::Box => caps.boxes,
                ElementKind::Enemy => caps.enemies,
                ElementKind::Coin => caps.coins,
            };
            (0.0, cap as f64)
        }
        Attr::X => (0.0, f64::from(SEGMENT_WIDTH - 1)),
        Attr::Row => (0.0, f64::from(SEGMENT_HEIGHT - 1)),
        Attr::Y => b(r.pedestal),
        Attr::Width(ElementKind::Gap) => b(r.gap_width),
        Attr::Width(ElementKind::Hill) => b(r.hill_width),
        Attr::Width(ElementKind::Box) => b(r.box_width),
        Attr::Width(_) => b(r.coin_width),
        Attr::Height(ElementKind::Hill) => b(r.hill_height),
        Attr::Height(_) => b(r.stack_height),
        Attr::WBefore | Attr::WAfter => b(r.margin),
        Attr::Type(_) => (0.0, 1.0),
    }
}

/// Value range (max - min) of an ordinal slot, at least 1.
pub fn slot_range(i: usize, r: &AttributeRanges) -> f64 {
    let (lo, hi) = slot_bounds(i, r);
    (hi - lo).max(1.0)
}

/// Fixed-length encoding of a canonical segment.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn kind(&self, i: usize) -> SlotKind {
        slot_kind(i)
    }

    pub fn is_absent(&self, i: usize) -> bool {
        self.values[i] < 0.0
    }

    /// Bit-level key, for hashing and duplicate detection.
    pub fn key(&self) -> [u64; FEATURE_COUNT] {
        let mut k = [0u64; FEATURE_COUNT];
        for (o, v) in k.iter_mut().zip(self.values.iter()) {
            *o = v.to_bits();
        }
        k
    }
}

fn fill<const N: usize>(out: &mut Vec<f64>, cap: usize, rows: impl Iterator<Item = [f64; N]>) {
    let mut n = 0;
    let start = out.len();
    out.push(0.0);
    for r in rows {
        out.extend_from_slice(&r);
        n += 1;
    }
    out[start] = n as f64;
    for _ in n..cap {
        out.extend(std::iter::repeat_n(ABSENT, N));
    }
}

impl SegmentDescriptor {
    /// Encodes a segment; element lists are taken in their current (canonical) order.
    pub fn to_feature_vector(&self) -> FeatureVector {
        let caps = ElementCaps::MAX;
        let mut v = Vec::with_capacity(FEATURE_COUNT);
        let f = f64::from;
        v.push(f(self.platform_height));
        fill(&mut v, caps.gaps, self.gaps.iter().map(|e| [f(e.x), f(e.width), e.kind.index() as f64]));
        fill(&mut v, caps.hills, self.hills.iter().map(|e| [f(e.x), f(e.width), f(e.height)]));
        fill(
            &mut v,
            caps.cannons,
            self.cannons
                .iter()
                .map(|e| [f(e.x), f(e.y), f(e.height), f(e.w_before), f(e.w_after)]),
        );
        fill(
            &mut v,
            caps.tubes,
            self.tubes.iter().map(|e| {
                [f(e.x), f(e.y), f(e.height), f(e.w_before), f(e.w_after), e.kind.index() as f64]
            }),
        );
        fill(
            &mut v,
            caps.boxes,
            self.boxes
                .iter()
                .map(|e| [f(e.x), f(e.y), f(e.width), e.kind.index() as f64]),
        );
        fill(&mut v, caps.enemies, self.enemies.iter().map(|e| [f(e.x), f(e.y), e.kind.index() as f64]));
        fill(&mut v, caps.coins, self.coins.iter().map(|e| [f(e.x), f(e.y), f(e.width)]));
        let mut values = [0.0; FEATURE_COUNT];
        values.copy_from_slice(&v);
        FeatureVector { values }
    }
}

struct Reader<'a> {
    v: &'a [f64; FEATURE_COUNT],
    pos: usize,
}

impl Reader<'_> {
    fn int(&mut self) -> Result<i32> {
        let x = self.v[self.pos];
        self.pos += 1;
        if x.fract() != 0.0 || x < 0.0 || x > 1000.0 {
            return Err(Error::InvalidSegment(format!(
                "slot {} holds {x}, expected a non-negative integer",
                self.pos
            )));
        }
        Ok(x as i32)
    }

    fn nominal<T: Nominal>(&mut self) -> Result<T> {
        let p = self.pos + 1;
        let i = self.int()? as usize;
        T::from_index(i).ok_or_else(|| Error::InvalidSegment(format!("slot {p}: bad type index {i}")))
    }

    /// Reads a group of `cap` element records of width `n`, `count` of them present.
    fn group<T>(
        &mut self,
        cap: usize,
        n: usize,
        mut read: impl FnMut(&mut Self) -> Result<T>,
    ) -> Result<Vec<T>> {
        let count = self.int()? as usize;
        if count > cap {
            return Err(Error::InvalidSegment(format!("count {count} exceeds cap {cap}")));
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(read(self)?);
        }
        for _ in count..cap {
            for _ in 0..n {
                if self.v[self.pos] != ABSENT {
                    return Err(Error::InvalidSegment(format!(
                        "slot {} of an absent element is not the sentinel",
                        self.pos + 1
                    )));
                }
                self.pos += 1;
            }
        }
        Ok(out)
    }
}

impl FeatureVector {
    /// Inverse of [`SegmentDescriptor::to_feature_vector`].
    pub fn decode(&self) -> Result<SegmentDescriptor> {
        let caps = ElementCaps::MAX;
        let mut r = Reader { v: &self.values, pos: 0 };
        let platform_height = r.int()?;
        let gaps = r.group(caps.gaps, 3, |r| {
            Ok(Gap { x: r.int()?, width: r.int()?, kind: r.nominal()? })
        })?;
        let hills = r.group(caps.hills, 3, |r| {
            Ok(Hill { x: r.int()?, width: r.int()?, height: r.int()? })
        })?;
        let cannons = r.group(caps.cannons, 5, |r| {
            Ok(Cannon {
                x: r.int()?,
                y: r.int()?,
                height: r.int()?,
                w_before: r.int()?,
                w_after: r.int()?,
            })
        })?;
        let tubes = r.group(caps.tubes, 6, |r| {
            Ok(Tube {
                x: r.int()?,
                y: r.int()?,
                height: r.int()?,
                w_before: r.int()?,
                w_after: r.int()?,
                kind: r.nominal()?,
            })
        })?;
        let boxes = r.group(caps.boxes, 4, |r| {
            Ok(BoxRun { x: r.int()?, y: r.int()?, width: r.int()?, kind: r.nominal()? })
        })?;
        let enemies = r.group(caps.enemies, 3, |r| {
            Ok(Enemy { x: r.int()?, y: r.int()?, kind: r.nominal()? })
        })?;
        let coins = r.group(caps.coins, 3, |r| {
            Ok(CoinRun { x: r.int()?, y: r.int()?, width: r.int()? })
        })?;
        debug_assert_eq!(r.pos, FEATURE_COUNT);
        Ok(SegmentDescriptor {
            platform_height,
            gaps,
            hills,
            cannons,
            tubes,
            boxes,
            enemies,
            coins,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_space::sample_segment;

    #[test]
    fn empty_segment_encoding() {
        let fv = SegmentDescriptor::empty(3).to_feature_vector();
        assert_eq!(fv.values[0], 3.0);
        for (i, s) in slots().iter().enumerate() {
            match s.attr {
                Attr::Count(_) => assert_eq!(fv.values[i], 0.0),
                Attr::PlatformHeight => {}
                _ => assert_eq!(fv.values[i], ABSENT, "slot {}", i + 1),
            }
        }
    }

    #[test]
    fn single_gap_encoding() {
        let mut s = SegmentDescriptor::empty(3);
        s.gaps.push(Gap { x: 5, width: 3, kind: GapKind::Plain });
        let fv = s.to_feature_vector();
        // 1-based ids 2..=11 are indices 1..=10
        assert_eq!(fv.values[1], 1.0);
        assert_eq!(&fv.values[2..5], &[5.0, 3.0, 0.0]);
        assert!(fv.values[5..11].iter().all(|&v| v == ABSENT));
    }

    #[test]
    fn layout_matches_table_ids() {
        let s = slots();
        // spot-check the table boundaries (1-based ids)
        assert!(matches!(s[1].attr, Attr::Count(ElementKind::Gap)));
        assert!(matches!(s[11].attr, Attr::Count(ElementKind::Hill)));
        assert!(matches!(s[18].attr, Attr::Count(ElementKind::Cannon)));
        assert!(matches!(s[34].attr, Attr::Count(ElementKind::Tube)));
        assert!(matches!(s[53].attr, Attr::Count(ElementKind::Box)));
        assert!(matches!(s[62].attr, Attr::Count(ElementKind::Enemy)));
        assert!(matches!(s[78].attr, Attr::Count(ElementKind::Coin)));
        let nominal = s.iter().filter(|x| x.kind == SlotKind::Nominal).count();
        assert_eq!(nominal, 3 + 3 + 2 + 5);
        assert_eq!(slot_description(0), "height of initial platform");
        assert_eq!(slot_description(2), "x of the first gap");
        assert_eq!(slot_description(65), "type of the first enemy");
        assert_eq!(slot_description(62), "number of enemies");
    }

    #[test]
    fn absent_slot_with_value_rejected() {
        let mut fv = SegmentDescriptor::empty(3).to_feature_vector();
        fv.values[2] = 4.0;
        assert!(fv.decode().is_err());
    }

    #[test]
    fn decode_inverts_encode_on_samples() {
        let caps = ElementCaps::MAX;
        let ranges = AttributeRanges::default();
        for seed in 0..1000 {
            let s = sample_segment(seed, &caps, &ranges);
            assert_eq!(s.to_feature_vector().decode().unwrap(), s);
        }
    }
}
