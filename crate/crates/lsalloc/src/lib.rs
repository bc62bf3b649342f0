//! Balls-into-bins allocation via local search on graphs.
//!
//! Bins are the vertices of an undirected graph. Each ball is born at a
//! uniformly random vertex and walks to neighbors of strictly smaller load
//! (ties uniform) until it reaches a local minimum, where it is placed.
//! The crate provides:
//!
//! * [`graph`] — compressed adjacency graphs plus generators for the standard
//!   families (cycle, path, torus, hypercube, complete, random regular,
//!   Cartesian products) and an edge-list text format.
//! * [`growth`] — the neighborhood growth radii `R1` and `R2` (and their
//!   quantile variants) that govern maximum load and cover time.
//! * [`alloc`] — the allocation processes: local search, 1-choice, d-choice,
//!   Poissonized variants, and the coupon-collector covering process.
//! * [`coupling`] — exact couplings between processes, runnable as per-step
//!   checks: majorization against 1-choice, the birthplace-swap L1 bound,
//!   ball removal, and the coupon-collector subset coupling.
//! * [`experiment`] — multi-trial sweeps over graph grids with CSV/JSON
//!   output and ratio band checks for scaling claims.
//! * [`rng`] — seeded, addressable random streams; every draw is a pure
//!   function of `(master seed, trial, address)`, which is what makes the
//!   couplings exact and every run reproducible.

pub mod alloc;
pub mod coupling;
pub mod experiment;
pub mod graph;
pub mod growth;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod specs;

pub use alloc::{LoadVector, RunRecord, StopRule, WeightFn};
pub use graph::Graph;
pub use growth::GrowthReport;
pub use rng::RngPlan;
