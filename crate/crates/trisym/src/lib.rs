//! Symmetric sphere triangulations.
//!
//! Maps are stored as clockwise rotation systems. On top of that the crate
//! computes rooted automorphism groups and the three constructive
//! decompositions of symmetric triangulations (girdle, fyke net, skeleton)
//! together with the inverse compositions, plus an exhaustive census used as
//! the oracle for all of them.

pub mod core_map;
pub mod error;

pub use error::{Error, ErrorKind, Result};
pub mod automorphism;
pub mod census;
pub mod fixtures;
pub mod fykenet;
pub mod girdle;
pub mod skeleton;
pub mod triangulation;
