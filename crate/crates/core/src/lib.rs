//! Approximate directed densest subgraphs under big-data constraints.
//!
//! * [`peel`]: fixed-threshold peeling with early stopping, run over a grid of
//!   `(D, z)` guesses.
//! * [`stream`]: a single-pass algorithm that keeps only per-vertex level and
//!   degree counters, usable as an insertion-only dynamic structure.
//! * [`mpc`]: a centralized simulator of the sublinear-memory MPC algorithm
//!   with round and memory accounting.
//! * [`baseline`]: average-degree peeling, the multi-pass reference.
//! * [`oracle`]: exact enumeration for graphs with at most 14 vertices per side.

pub mod baseline;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod grid;
pub mod harness;
pub mod ingest;
pub mod mpc;
pub mod oracle;
pub mod peel;
pub mod stream;
pub mod verify;

pub use error::GraphError;
pub use graph::{density, BipartiteGraph, DensityValue, DirectedEdge, DirectedEdgeList, VertexId, VertexPair};
pub use grid::{GridCell, GuessGrid, Thresholds};
