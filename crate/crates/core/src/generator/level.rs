//! Level file format and image output.

use std::fmt::Write as _;

use super::{Categories, ConstructivePrimitive, GenerationParams};
use crate::content_space::{parse_block, parse_tiles_header, Fields, SegmentDescriptor, Tile, TileGrid, ROWS, SEGMENT_WIDTH};
use crate::error::{Error, Result};

/// Column of the goal pole inside the exit segment.
pub const GOAL_X: usize = 18;
/// Pixels per tile edge in image output.
pub const PPM_BLOCK: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub params: GenerationParams,
    pub entry: SegmentDescriptor,
    pub cps: Vec<ConstructivePrimitive>,
    pub exit: SegmentDescriptor,
}

impl Level {
    pub fn segments(&self) -> impl Iterator<Item = &SegmentDescriptor> {
        std::iter::once(&self.entry)
            .chain(self.cps.iter().map(|c| &c.segment))
            .chain(std::iter::once(&self.exit))
    }

    pub fn tile_width(&self) -> usize {
        SEGMENT_WIDTH as usize * (self.cps.len() + 2)
    }

    /// Level column holding the goal pole.
    pub fn goal_column(&self) -> usize {
        SEGMENT_WIDTH as usize * (self.cps.len() + 1) + GOAL_X
    }

    pub fn to_text(&self) -> Result<String> {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "LEVEL n_cps={} leniency={} density={} linearity={} seed={}",
            p.n_cps, p.leniency, p.density, p.linearity, p.seed
        );
        s.push_str("PART entry\n");
        self.entry.write_text(&mut s);
        for cp in &self.cps {
            let c = cp.categories;
            let _ = writeln!(
                s,
                "PART cp leniency={} density={} linearity={} difficulty={} confidence={}",
                c.leniency, c.density, c.linearity, cp.difficulty, cp.confidence
            );
            cp.segment.write_text(&mut s);
        }
        let _ = writeln!(s, "PART exit goal_x={GOAL_X}");
        self.exit.write_text(&mut s);
        s.push_str(&self.grid()?.to_tile_file());
        Ok(s)
    }

    /// Parses a level file. The tile block must match the rendered segments.
    pub fn parse_text(text: &str) -> Result<Level> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or_else(|| Error::parse(1, "missing LEVEL header"))?;
        let (tag, mut f) = Fields::split(header, 1)?;
        if tag != "LEVEL" {
            return Err(Error::parse(1, format!("expected LEVEL, found '{tag}'")));
        }
        let params = GenerationParams {
            n_cps: f.get("n_cps")?,
            leniency: f.get("leniency")?,
            density: f.get("density")?,
            linearity: f.get("linearity")?,
            seed: f.get("seed")?,
        };
        f.finish()?;
        params.validate().map_err(|e| Error::parse(1, e.to_string()))?;

        let mut i = 1;
        let mut entry = None;
        let mut exit = None;
        let mut cps = Vec::new();
        while i < lines.len() && lines[i].starts_with("PART") {
            let lineno = i + 1;
            let mut tokens = lines[i].split_whitespace().skip(1);
            let kind = tokens.next().unwrap_or("");
            // the part kind is a bare token; the rest are k=v fields
            let line = format!("PART {}", tokens.collect::<Vec<_>>().join(" "));
            let (_, mut fields) = Fields::split(&line, lineno)?;
            let (seg, used) = parse_block(&lines[i + 1..], lineno + 1)?;
            match kind {
                "entry" if entry.is_none() && cps.is_empty() => {
                    fields.finish()?;
                    entry = Some(seg);
                }
                "cp" if entry.is_some() && exit.is_none() => {
                    let categories = Categories {
                        leniency: fields.get("leniency")?,
                        density: fields.get("density")?,
                        linearity: fields.get("linearity")?,
                    };
                    let difficulty = fields.get("difficulty")?;
                    let confidence = fields.get("confidence")?;
                    fields.finish()?;
                    cps.push(ConstructivePrimitive { segment: seg, categories, difficulty, confidence });
                }
                "exit" if entry.is_some() && exit.is_none() => {
                    let goal: usize = fields.get("goal_x")?;
                    fields.finish()?;
                    if goal != GOAL_X {
                        return Err(Error::parse(lineno, format!("goal_x={goal}, expected {GOAL_X}")));
                    }
                    exit = Some(seg);
                }
                _ => return Err(Error::parse(lineno, format!("unexpected part '{kind}'"))),
            }
            i += 1 + used;
        }
        let (Some(entry), Some(exit)) = (entry, exit) else {
            return Err(Error::parse(i + 1, "level needs entry and exit parts"));
        };
        if cps.len() != params.n_cps {
            return Err(Error::parse(1, format!("n_cps={} but file has {} cp parts", params.n_cps, cps.len())));
        }
        let level = Level { params, entry, cps, exit };

        let header = lines.get(i).ok_or_else(|| Error::parse(i + 1, "missing TILES block"))?;
        let (w, h) = parse_tiles_header(header, i + 1)?;
        if h != ROWS || w != level.tile_width() {
            return Err(Error::parse(i + 1, format!("TILES w={w} h={h} does not fit the level")));
        }
        let rows = lines.get(i + 1..i + 1 + ROWS).ok_or_else(|| Error::parse(i + 2, "truncated TILES block"))?;
        let grid = TileGrid::from_rows(rows.iter().copied(), i + 2)?;
        if grid != level.grid()? {
            return Err(Error::parse(i + 1, "tile map does not match the segments"));
        }
        if let Some((j, l)) = lines[i + 1 + ROWS..].iter().enumerate().find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(i + 2 + ROWS + j, format!("unexpected line '{l}'")));
        }
        Ok(level)
    }
}

fn colour(t: Tile) -> [u8; 3] {
    match t {
        Tile::Air => [146, 144, 255],
        Tile::Ground => [136, 72, 24],
        Tile::Hill => [56, 160, 56],
        Tile::Tube => [0, 168, 0],
        Tile::FlowerHead => [216, 40, 40],
        Tile::Cannon => [40, 40, 40],
        Tile::CoinBox => [240, 188, 60],
        Tile::PowerupBox => [252, 120, 24],
        Tile::Brick => [180, 96, 52],
        Tile::Coin => [255, 224, 0],
        Tile::Goomba => [120, 60, 20],
        Tile::KoopaGreen => [24, 120, 24],
        Tile::KoopaRed => [190, 0, 0],
        Tile::Spiky => [200, 0, 120],
    }
}

const POLE: [u8; 3] = [240, 240, 240];

/// Binary pixmap, one `PPM_BLOCK`-square block per tile. Air cells of
/// `goal_column` are drawn as the goal pole.
pub fn render_ppm(grid: &TileGrid, goal_column: Option<usize>) -> Vec<u8> {
    let (w, h) = (grid.width() * PPM_BLOCK, ROWS * PPM_BLOCK);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for py in 0..h {
        let r = py / PPM_BLOCK;
        for px in 0..w {
            let c = px / PPM_BLOCK;
            let t = grid.get(c, r);
            let rgb = if goal_column == Some(c) && t == Tile::Air { POLE } else { colour(t) };
            out.extend_from_slice(&rgb);
        }
    }
    out
}

impl Level {
    pub fn to_ppm(&self) -> Result<Vec<u8>> {
        Ok(render_ppm(&self.grid()?, Some(self.goal_column())))
    }
}
