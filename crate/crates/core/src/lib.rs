//! Facilitated exclusion processes on the segment and the circle.
//!
//! Configurations and ergodic components live in [`state`], the lattice
//! path encoding in [`lattice_path`], event-driven simulation under a shared
//! Poisson clock field in [`engine`], process correspondences in
//! [`mappings`], exhaustive small-system analysis in [`exact`] and Monte
//! Carlo studies in [`experiments`].

pub mod engine;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod lattice_path;
pub mod mappings;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
