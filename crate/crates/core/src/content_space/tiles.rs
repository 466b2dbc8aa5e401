use std::fmt::Write as _;

use super::elements::*;
use crate::error::{Error, Result};
use crate::rules;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tile {
    Air,
    Ground,
    Hill,
    Tube,
    FlowerHead,
    Cannon,
    CoinBox,
    PowerupBox,
    Brick,
    Coin,
    Goomba,
    KoopaGreen,
    KoopaRed,
    Spiky,
}

impl Tile {
    pub const ALL: [Tile; 14] = [
        Tile::Air,
        Tile::Ground,
        Tile::Hill,
        Tile::Tube,
        Tile::FlowerHead,
        Tile::Cannon,
        Tile::CoinBox,
        Tile::PowerupBox,
        Tile::Brick,
        Tile::Coin,
        Tile::Goomba,
        Tile::KoopaGreen,
        Tile::KoopaRed,
        Tile::Spiky,
    ];

    pub fn to_char(self) -> char {
        match self {
            Tile::Air => '-',
            Tile::Ground => 'X',
            Tile::Hill => 'H',
            Tile::Tube => 'T',
            Tile::FlowerHead => 'F',
            Tile::Cannon => 'C',
            Tile::CoinBox => '?',
            Tile::PowerupBox => '!',
            Tile::Brick => 'B',
            Tile::Coin => 'o',
            Tile::Goomba => 'g',
            Tile::KoopaGreen => 'k',
            Tile::KoopaRed => 'r',
            Tile::Spiky => 's',
        }
    }

    pub fn from_char(c: char) -> Option<Tile> {
        Tile::ALL.iter().copied().find(|t| t.to_char() == c)
    }

    /// Blocks movement and supports standing.
    pub fn is_solid(self) -> bool {
        matches!(
            self,
            Tile::Ground
                | Tile::Hill
                | Tile::Tube
                | Tile::FlowerHead
                | Tile::Cannon
                | Tile::CoinBox
                | Tile::PowerupBox
                | Tile::Brick
        )
    }

    pub fn is_enemy(self) -> bool {
        matches!(self, Tile::Goomba | Tile::KoopaGreen | Tile::KoopaRed | Tile::Spiky)
    }

    /// Ground or hill: the surfaces that make up a level profile.
    pub fn is_terrain(self) -> bool {
        matches!(self, Tile::Ground | Tile::Hill)
    }

    fn enemy(kind: EnemyKind) -> Tile {
        match kind {
            EnemyKind::Goomba => Tile::Goomba,
            EnemyKind::KoopaGreen => Tile::KoopaGreen,
            EnemyKind::KoopaRed => Tile::KoopaRed,
            EnemyKind::Spiky => Tile::Spiky,
        }
    }

    fn boxed(kind: BoxKind) -> Tile {
        match kind {
            BoxKind::Coin => Tile::CoinBox,
            BoxKind::Powerup => Tile::PowerupBox,
            BoxKind::Brick => Tile::Brick,
        }
    }
}

/// A 15-row tile map, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileGrid {
    width: usize,
    cells: Vec<Tile>,
}

pub const ROWS: usize = SEGMENT_HEIGHT as usize;

impl TileGrid {
    pub fn new(width: usize) -> Self {
        TileGrid { width, cells: vec![Tile::Air; width * ROWS] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        ROWS
    }

    pub fn get(&self, col: usize, row: usize) -> Tile {
        self.cells[row * self.width + col]
    }

    /// Out-of-grid lookups return `None`.
    pub fn at(&self, col: i64, row: i64) -> Option<Tile> {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= ROWS {
            None
        } else {
            Some(self.get(col as usize, row as usize))
        }
    }

    pub fn set(&mut self, col: usize, row: usize, tile: Tile) {
        self.cells[row * self.width + col] = tile;
    }

    pub fn is_solid(&self, col: usize, row: usize) -> bool {
        self.get(col, row).is_solid()
    }

    /// Air-like cell with a solid tile directly below.
    pub fn is_standing(&self, col: usize, row: usize) -> bool {
        !self.is_solid(col, row) && row + 1 < ROWS && self.is_solid(col, row + 1)
    }

    /// Column with no solid tile at all.
    pub fn is_gap_column(&self, col: usize) -> bool {
        (0..ROWS).all(|r| !self.is_solid(col, r))
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Tile)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &t)| (i % self.width, i / self.width, t))
    }

    /// Places `other` side by side to the right.
    pub fn append(&mut self, other: &TileGrid) {
        let w = self.width + other.width;
        let mut cells = Vec::with_capacity(w * ROWS);
        for r in 0..ROWS {
            cells.extend_from_slice(&self.cells[r * self.width..(r + 1) * self.width]);
            cells.extend_from_slice(&other.cells[r * other.width..(r + 1) * other.width]);
        }
        self.width = w;
        self.cells = cells;
    }

    pub fn concat<'a>(grids: impl IntoIterator<Item = &'a TileGrid>) -> TileGrid {
        let grids: Vec<&TileGrid> = grids.into_iter().collect();
        let width = grids.iter().map(|g| g.width).sum();
        let mut out = TileGrid::new(width);
        let mut offset = 0;
        for g in grids {
            for r in 0..ROWS {
                for c in 0..g.width {
                    out.set(offset + c, r, g.get(c, r));
                }
            }
            offset += g.width;
        }
        out
    }

    /// The 15 map rows, each newline-terminated; this is the byte form used for NCD.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * ROWS);
        for r in 0..ROWS {
            for c in 0..self.width {
                s.push(self.get(c, r).to_char());
            }
            s.push('\n');
        }
        s
    }

    /// Tile map file: header line then the 15 rows.
    pub fn to_tile_file(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "TILES w={} h={}", self.width, ROWS);
        s.push_str(&self.to_ascii());
        s
    }

    /// Parses the 15 map rows (no header). `first_line` numbers diagnostics.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a str>, first_line: usize) -> Result<TileGrid> {
        let rows: Vec<&str> = rows.into_iter().collect();
        if rows.len() != ROWS {
            return Err(Error::parse(first_line, format!("expected {ROWS} tile rows, found {}", rows.len())));
        }
        let width = rows[0].chars().count();
        if width == 0 {
            return Err(Error::parse(first_line, "empty tile row"));
        }
        let mut g = TileGrid::new(width);
        for (r, line) in rows.iter().enumerate() {
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != width {
                return Err(Error::parse(first_line + r, "tile rows differ in length"));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                let t = Tile::from_char(ch)
                    .ok_or_else(|| Error::parse(first_line + r, format!("unknown tile '{ch}'")))?;
                g.set(c, r, t);
            }
        }
        Ok(g)
    }

    pub fn parse_tile_file(text: &str) -> Result<TileGrid> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing TILES header"))?;
        let (w, h) = parse_tiles_header(header, 1)?;
        let rows: Vec<&str> = lines.take(ROWS).collect();
        if h != ROWS {
            return Err(Error::parse(1, format!("h={h}, expected {ROWS}")));
        }
        let g = TileGrid::from_rows(rows, 2)?;
        if g.width != w {
            return Err(Error::parse(1, format!("header w={w} but rows have {} columns", g.width)));
        }
        Ok(g)
    }
}

pub(crate) fn parse_tiles_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    if it.next() != Some("TILES") {
        return Err(Error::parse(lineno, "expected TILES header"));
    }
    let mut w = None;
    let mut h = None;
    for kv in it {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("malformed field '{kv}'")))?;
        let n: usize = v.parse().map_err(|_| Error::parse(lineno, format!("bad number '{v}'")))?;
        match k {
            "w" => w = Some(n),
            "h" => h = Some(n),
            _ => return Err(Error::parse(lineno, format!("unknown field '{k}'"))),
        }
    }
    match (w, h) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(Error::parse(lineno, "TILES header needs w and h")),
    }
}

impl SegmentDescriptor {
    /// Renders the segment to a 20x15 grid. Rejects conflicting segments.
    pub fn render_tiles(&self) -> Result<TileGrid> {
        self.validate()?;
        let report = rules::check_conflicts(self);
        if !report.is_clean() {
            return Err(Error::Conflicting(report.summary()));
        }
        Ok(self.render_unchecked())
    }

    /// Rendering without validation; callers guarantee a valid, clean segment.
    pub(crate) fn render_unchecked(&self) -> TileGrid {
        let w = SEGMENT_WIDTH as usize;
        let mut grid = TileGrid::new(w);
        let g = self.ground_row() as usize;
        for r in g..ROWS {
            for c in 0..w {
                grid.set(c, r, Tile::Ground);
            }
        }
        for gap in &self.gaps {
            for c in gap.x..gap.x + gap.width {
                for r in 0..ROWS {
                    grid.set(c as usize, r, Tile::Air);
                }
            }
        }
        // hills are elevated platforms: a solid top run over open background
        for h in &self.hills {
            let top = g - h.height as usize;
            for c in h.x..h.x + h.width {
                grid.set(c as usize, top, Tile::Hill);
            }
        }
        for t in &self.tubes {
            let top = g - t.total_height() as usize;
            for c in t.x..t.x + TUBE_WIDTH {
                for r in top..g {
                    grid.set(c as usize, r, Tile::Tube);
                }
                if t.kind == TubeKind::Flower {
                    grid.set(c as usize, top, Tile::FlowerHead);
                }
            }
        }
        for cn in &self.cannons {
            let top = g - cn.total_height() as usize;
            for r in top..g {
                grid.set(cn.x as usize, r, Tile::Cannon);
            }
        }
        for b in &self.boxes {
            for c in b.x..b.x + b.width {
                grid.set(c as usize, b.y as usize, Tile::boxed(b.kind));
            }
        }
        for coin in &self.coins {
            for c in coin.x..coin.x + coin.width {
                grid.set(c as usize, coin.y as usize, Tile::Coin);
            }
        }
        // enemies drop from their declared cell onto the first solid tile below
        for e in &self.enemies {
            let c = e.x as usize;
            let mut r = e.y as usize;
            while r + 1 < ROWS && !grid.is_solid(c, r + 1) {
                r += 1;
            }
            if r + 1 < ROWS {
                grid.set(c, r, Tile::enemy(e.kind));
            }
        }
        grid
    }
}
