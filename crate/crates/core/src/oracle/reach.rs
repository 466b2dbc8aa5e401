use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::content_space::{TileGrid, ROWS};
use crate::error::{Error, Result};

/// Avatar movement limits in tiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpModel {
    /// Rows gained by a full jump.
    pub max_jump_height: usize,
    /// Columns covered by a jump that lands at its take-off height.
    pub max_jump_span: usize,
}

impl Default for JumpModel {
    fn default() -> Self {
        JumpModel { max_jump_height: 4, max_jump_span: 5 }
    }
}

/// Result of a reachability search.
#[derive(Clone, Debug)]
pub struct Reach {
    width: usize,
    visited: Vec<bool>,
    landed: Vec<bool>,
}

impl Reach {
    /// The avatar passes through this cell on some path.
    pub fn visited(&self, col: usize, row: usize) -> bool {
        self.visited[row * self.width + col]
    }

    /// The avatar can stand on this cell.
    pub fn can_stand(&self, col: usize, row: usize) -> bool {
        self.landed[row * self.width + col]
    }

    pub fn standing_cells(&self) -> Vec<(usize, usize)> {
        self.cells(&self.landed)
    }

    pub fn visited_cells(&self) -> Vec<(usize, usize)> {
        self.cells(&self.visited)
    }

    fn cells(&self, set: &[bool]) -> Vec<(usize, usize)> {
        set.iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Standing,
    /// Still able to rise `up` more rows.
    Rising { up: usize },
    Falling,
}

#[derive(Clone, Copy, Debug)]
struct State {
    col: usize,
    row: usize,
    phase: Phase,
    /// Horizontal moves left before landing.
    drift: usize,
}

struct Search<'a> {
    grid: &'a TileGrid,
    model: JumpModel,
    per_cell: usize,
    seen: Vec<bool>,
    queue: VecDeque<State>,
    reach: Reach,
}

impl<'a> Search<'a> {
    fn new(grid: &'a TileGrid, model: JumpModel) -> Self {
        let n = grid.width() * ROWS;
        let per_cell = 1 + (model.max_jump_height + 2) * (model.max_jump_span + 1);
        Search {
            grid,
            model,
            per_cell,
            seen: vec![false; n * per_cell],
            queue: VecDeque::new(),
            reach: Reach { width: grid.width(), visited: vec![false; n], landed: vec![false; n] },
        }
    }

    fn index(&self, s: &State) -> usize {
        let cell = s.row * self.grid.width() + s.col;
        let phase = match s.phase {
            Phase::Standing => 0,
            Phase::Rising { up } => 1 + up * (self.model.max_jump_span + 1) + s.drift,
            Phase::Falling => {
                1 + (self.model.max_jump_height + 1) * (self.model.max_jump_span + 1) + s.drift
            }
        };
        cell * self.per_cell + phase
    }

    fn push(&mut self, s: State) {
        let i = self.index(&s);
        if !self.seen[i] {
            self.seen[i] = true;
            let cell = s.row * self.grid.width() + s.col;
            self.reach.visited[cell] = true;
            if s.phase == Phase::Standing {
                self.reach.landed[cell] = true;
            }
            self.queue.push_back(s);
        }
    }

    fn free(&self, col: i64, row: i64) -> bool {
        matches!(self.grid.at(col, row), Some(t) if !t.is_solid())
    }

    /// Target of a move by (dx, dy), if the path is open. Diagonal moves need
    /// one of the two orthogonal neighbours to be open as well.
    fn step(&self, s: &State, dx: i64, dy: i64) -> Option<(usize, usize)> {
        let (c, r) = (s.col as i64, s.row as i64);
        let (tc, tr) = (c + dx, r + dy);
        if !self.free(tc, tr) {
            return None;
        }
        if dx != 0 && dy != 0 && !self.free(tc, r) && !self.free(c, tr) {
            return None;
        }
        Some((tc as usize, tr as usize))
    }

    fn supported(&self, col: usize, row: usize) -> bool {
        row + 1 < ROWS && self.grid.is_solid(col, row + 1)
    }

    fn expand(&mut self, s: State) {
        let span = self.model.max_jump_span;
        match s.phase {
            Phase::Standing => {
                for dx in [-1i64, 1] {
                    if let Some((c, r)) = self.step(&s, dx, 0) {
                        let phase = if self.supported(c, r) { Phase::Standing } else { Phase::Falling };
                        self.push(State { col: c, row: r, phase, drift: if phase == Phase::Falling { span } else { 0 } });
                    }
                }
                if self.model.max_jump_height > 0 {
                    self.push(State { phase: Phase::Rising { up: self.model.max_jump_height }, drift: span, ..s });
                }
            }
            Phase::Rising { up } => {
                if up > 0 {
                    for dx in [-1i64, 0, 1] {
                        let cost = dx.unsigned_abs() as usize;
                        if cost > s.drift {
                            continue;
                        }
                        if let Some((c, r)) = self.step(&s, dx, -1) {
                            self.push(State { col: c, row: r, phase: Phase::Rising { up: up - 1 }, drift: s.drift - cost });
                        }
                    }
                }
                // the jump may end at any point with one level tick
                for dx in [-1i64, 0, 1] {
                    let cost = dx.unsigned_abs() as usize;
                    if cost > s.drift {
                        continue;
                    }
                    if let Some((c, r)) = self.step(&s, dx, 0) {
                        self.push(State { col: c, row: r, phase: Phase::Falling, drift: s.drift - cost });
                    }
                }
            }
            Phase::Falling => {
                if self.supported(s.col, s.row) {
                    self.push(State { phase: Phase::Standing, drift: 0, ..s });
                    return;
                }
                for dx in [-1i64, 0, 1] {
                    let cost = dx.unsigned_abs() as usize;
                    if cost > s.drift {
                        continue;
                    }
                    // stepping below the bottom row is a fall out of the level
                    if let Some((c, r)) = self.step(&s, dx, 1) {
                        self.push(State { col: c, row: r, phase: Phase::Falling, drift: s.drift - cost });
                    }
                }
            }
        }
    }

    fn run(mut self, start: (usize, usize)) -> Reach {
        self.push(State { col: start.0, row: start.1, phase: Phase::Standing, drift: 0 });
        while let Some(s) = self.queue.pop_front() {
            self.expand(s);
        }
        self.reach
    }
}

/// Every cell the avatar can occupy starting from a standing cell.
pub fn reachable_cells(grid: &TileGrid, start: (usize, usize), model: &JumpModel) -> Result<Reach> {
    let (col, row) = start;
    if col >= grid.width() || row >= ROWS || !grid.is_standing(col, row) {
        return Err(Error::NotStanding { col, row });
    }
    Ok(Search::new(grid, *model).run(start))
}

/// Lowest standing cell of a column.
pub fn start_cell(grid: &TileGrid, col: usize) -> Option<(usize, usize)> {
    (0..ROWS).rev().find(|&r| grid.is_standing(col, r)).map(|r| (col, r))
}

/// True when a standing cell in the last column is reachable from the
/// lowest standing cell in column 0.
pub fn grid_is_playable(grid: &TileGrid, model: &JumpModel) -> bool {
    let Some(start) = start_cell(grid, 0) else {
        return false;
    };
    let reach = Search::new(grid, *model).run(start);
    let last = grid.width() - 1;
    (0..ROWS).any(|r| reach.can_stand(last, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_space::Tile;

    fn flat(width: usize, platform: usize) -> TileGrid {
        let mut g = TileGrid::new(width);
        for c in 0..width {
            for r in ROWS - platform..ROWS {
                g.set(c, r, Tile::Ground);
            }
        }
        g
    }

    fn carve(g: &mut TileGrid, c0: usize, width: usize) {
        for c in c0..c0 + width {
            for r in 0..ROWS {
                g.set(c, r, Tile::Air);
            }
        }
    }

    #[test]
    fn flat_surface_fully_reachable() {
        let g = flat(20, 3);
        let reach = reachable_cells(&g, (0, 11), &JumpModel::default()).unwrap();
        let surface: Vec<_> = reach.standing_cells();
        assert_eq!(surface.len(), 20);
        assert!(surface.iter().all(|&(_, r)| r == 11));
        // full jump height above the surface is visited, one more is not
        assert!(reach.visited(5, 7));
        assert!(!reach.visited(5, 6));
    }

    #[test]
    fn start_must_be_standing() {
        let g = flat(20, 3);
        assert!(matches!(
            reachable_cells(&g, (0, 5), &JumpModel::default()),
            Err(Error::NotStanding { col: 0, row: 5 })
        ));
    }

    #[test]
    fn ledge_heights() {
        for (h, expect) in [(4, true), (5, false)] {
            let mut g = flat(20, 3);
            for c in 10..14 {
                for r in 12 - h..12 {
                    g.set(c, r, Tile::Hill);
                }
            }
            let reach = reachable_cells(&g, (0, 11), &JumpModel::default()).unwrap();
            assert_eq!(reach.can_stand(11, 11 - h), expect, "ledge of height {h}");
        }
    }

    #[test]
    fn gap_widths() {
        for w in 1..=7 {
            let mut g = flat(20, 3);
            carve(&mut g, 8, w);
            assert_eq!(grid_is_playable(&g, &JumpModel::default()), w <= 4, "gap width {w}");
        }
    }

    #[test]
    fn no_start_is_unplayable() {
        let mut g = flat(20, 3);
        carve(&mut g, 0, 1);
        assert!(!grid_is_playable(&g, &JumpModel::default()));
    }

    #[test]
    fn hill_underside_is_walkable() {
        let mut g = flat(20, 2);
        for c in 5..15 {
            g.set(c, 10, Tile::Hill);
        }
        let reach = reachable_cells(&g, (0, 12), &JumpModel::default()).unwrap();
        assert!(reach.can_stand(9, 12));
        assert!(reach.can_stand(9, 9));
    }
}
