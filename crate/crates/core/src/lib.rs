//! Semi-dynamic succinct graphs.
//!
//! A [`DynamicGraph`] keeps recent edges in an uncompressed buffer and
//! everything else in a small number of static [`K2Tree`]s whose sizes follow
//! a geometric schedule. Buffer overflows are absorbed by merging trees with
//! compression-preserving unions; deletions tombstone leaf bits until enough
//! accumulate to justify a rebuild.
//!
//! ```
//! use sdk2tree::DynamicGraph;
//!
//! let mut g = DynamicGraph::default();
//! g.add_edge(0, 1)?;
//! g.add_edge(0, 2)?;
//! assert!(g.contains(0, 1));
//! assert_eq!(g.neighbors(0), vec![1, 2]);
//! assert!(g.remove_edge(0, 1));
//! # Ok::<(), sdk2tree::Error>(())
//! ```

pub mod bitvec;
pub mod cli;
pub mod dyngraph;
pub mod error;
pub mod genmodel;
pub mod k2tree;

pub use bitvec::{BitVector, ClearableBitVector, RankBitVector};
pub use dyngraph::{DynamicGraph, EdgeBuffer, GraphStats, MaintenanceEvent};
pub use error::{Error, Result};
pub use genmodel::GeneratorConfig;
pub use k2tree::{Edge, K2Tree};
