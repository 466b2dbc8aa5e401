//! Line-oriented descriptor format: a `SEGMENT` header followed by one
//! `KIND k=v ...` line per element in canonical order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::elements::*;
use crate::error::{Error, Result};

impl SegmentDescriptor {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s);
        s
    }

    pub(crate) fn write_text(&self, s: &mut String) {
        let _ = writeln!(s, "SEGMENT platform_height={}", self.platform_height);
        for e in &self.gaps {
            let _ = writeln!(s, "GAP x={} width={} type={}", e.x, e.width, e.kind.name());
        }
        for e in &self.hills {
            let _ = writeln!(s, "HILL x={} width={} height={}", e.x, e.width, e.height);
        }
        for e in &self.cannons {
            let _ = writeln!(
                s,
                "CANNON x={} y={} height={} w_before={} w_after={}",
                e.x, e.y, e.height, e.w_before, e.w_after
            );
        }
        for e in &self.tubes {
            let _ = writeln!(
                s,
                "TUBE x={} y={} height={} w_before={} w_after={} type={}",
                e.x,
                e.y,
                e.height,
                e.w_before,
                e.w_after,
                e.kind.name()
            );
        }
        for e in &self.boxes {
            let _ = writeln!(s, "BOX x={} y={} width={} type={}", e.x, e.y, e.width, e.kind.name());
        }
        for e in &self.enemies {
            let _ = writeln!(s, "ENEMY x={} y={} type={}", e.x, e.y, e.kind.name());
        }
        for e in &self.coins {
            let _ = writeln!(s, "COIN x={} y={} width={}", e.x, e.y, e.width);
        }
    }

    /// Parses a single standalone descriptor.
    pub fn parse_text(text: &str) -> Result<SegmentDescriptor> {
        let lines: Vec<&str> = text.lines().collect();
        let (seg, used) = parse_block(&lines, 1)?;
        if let Some((i, l)) = lines[used..].iter().enumerate().find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(used + i + 1, format!("unexpected line '{l}'")));
        }
        Ok(seg)
    }
}

pub(crate) struct Fields<'a> {
    line: usize,
    map: HashMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    /// Splits `TAG k=v k=v` into the tag and its fields.
    pub(crate) fn split(line: &'a str, lineno: usize) -> Result<(&'a str, Fields<'a>)> {
        let mut it = line.split_whitespace();
        let tag = it.next().ok_or_else(|| Error::parse(lineno, "empty line"))?;
        let mut map = HashMap::new();
        for kv in it {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, format!("malformed field '{kv}'")))?;
            if map.insert(k, v).is_some() {
                return Err(Error::parse(lineno, format!("duplicate field '{k}'")));
            }
        }
        Ok((tag, Fields { line: lineno, map }))
    }

    pub(crate) fn raw(&mut self, key: &str) -> Result<&'a str> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::parse(self.line, format!("missing field '{key}'")))
    }

    pub(crate) fn get<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse()
            .map_err(|_| Error::parse(self.line, format!("bad value '{v}' for '{key}'")))
    }

    pub(crate) fn nominal<T: Nominal>(&mut self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        T::from_name(v).ok_or_else(|| Error::parse(self.line, format!("unknown {key} '{v}'")))
    }

    /// Rejects any field not consumed so far.
    pub(crate) fn finish(self) -> Result<()> {
        match self.map.keys().min() {
            Some(k) => Err(Error::parse(self.line, format!("unknown field '{k}'"))),
            None => Ok(()),
        }
    }
}

fn is_element_tag(tag: &str) -> bool {
    matches!(tag, "GAP" | "HILL" | "CANNON" | "TUBE" | "BOX" | "ENEMY" | "COIN")
}

/// Parses a `SEGMENT` block starting at `lines[0]`, returning the descriptor
/// and the number of lines consumed. The result is validated and canonical.
pub(crate) fn parse_block(lines: &[&str], first_line: usize) -> Result<(SegmentDescriptor, usize)> {
    let header = lines.first().ok_or_else(|| Error::parse(first_line, "missing SEGMENT header"))?;
    let (tag, mut f) = Fields::split(header, first_line)?;
    if tag != "SEGMENT" {
        return Err(Error::parse(first_line, format!("expected SEGMENT, found '{tag}'")));
    }
    let mut seg = SegmentDescriptor::empty(f.get("platform_height")?);
    f.finish()?;
    let mut used = 1;
    for line in &lines[1..] {
        let lineno = first_line + used;
        let (tag, mut f) = match Fields::split(line, lineno) {
            Ok((tag, f)) if is_element_tag(tag) => (tag, f),
            _ => break,
        };
        match tag {
            "GAP" => seg.gaps.push(Gap { x: f.get("x")?, width: f.get("width")?, kind: f.nominal("type")? }),
            "HILL" => seg.hills.push(Hill { x: f.get("x")?, width: f.get("width")?, height: f.get("height")? }),
            "CANNON" => seg.cannons.push(Cannon {
                x: f.get("x")?,
                y: f.get("y")?,
                height: f.get("height")?,
                w_before: f.get("w_before")?,
                w_after: f.get("w_after")?,
            }),
            "TUBE" => seg.tubes.push(Tube {
                x: f.get("x")?,
                y: f.get("y")?,
                height: f.get("height")?,
                w_before: f.get("w_before")?,
                w_after: f.get("w_after")?,
                kind: f.nominal("type")?,
            }),
            "BOX" => seg.boxes.push(BoxRun {
                x: f.get("x")?,
                y: f.get("y")?,
                width: f.get("width")?,
                kind: f.nominal("type")?,
            }),
            "ENEMY" => seg.enemies.push(Enemy { x: f.get("x")?, y: f.get("y")?, kind: f.nominal("type")? }),
            _ => seg.coins.push(CoinRun { x: f.get("x")?, y: f.get("y")?, width: f.get("width")? }),
        }
        f.finish()?;
        used += 1;
    }
    seg.validate().map_err(|e| Error::parse(first_line, e.to_string()))?;
    seg.canonicalize_in_place();
    Ok((seg, used))
}
