//! Constructive-primitive level generation for a tile-based platformer.
//!
//! Segments are sampled from a typed design-element space, filtered by
//! geometric rules, labeled by a programmatic oracle, and used to train an
//! oblique random forest that approves segments for level assembly.
//! Completed levels can be measured and served through a bandit-driven
//! difficulty adapter.

pub mod adapt;
pub mod content_space;
pub mod dataset;
pub mod error;
pub mod generator;
pub mod learn;
pub mod metrics;
pub mod oracle;
pub mod rules;
pub mod seed;

pub use error::{Error, Result};
