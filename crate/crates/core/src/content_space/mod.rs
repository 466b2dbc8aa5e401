//! Segment representation: typed design elements, the 85-slot feature
//! encoding, uniform sampling and tile rendering.

mod elements;
mod features;
mod sampling;
mod text;
mod tiles;

pub use elements::*;
pub use features::*;
pub use sampling::{sample_segment, sample_with, AttributeRanges};
pub use tiles::{Tile, TileGrid, ROWS};

pub(crate) use sampling::{pick, pick_nominal, row_at_elevation};
pub(crate) use text::{parse_block, Fields};
pub(crate) use tiles::parse_tiles_header;
