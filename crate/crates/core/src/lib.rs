//! Deterministic approximation of the volume of truncated independent-set
//! polytopes via a tree-weighted forest polynomial.

pub mod bitset;
pub mod canon;
pub mod coeffs;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod interp;
pub mod oracles;
pub mod poly;
pub mod weight;

pub use error::{Error, ParseError, Result};
pub use graph::Graph;
