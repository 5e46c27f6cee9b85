//! A desk-scale laboratory for cumulative-memory complexity.
//!
//! Cumulative memory (CM) charges a computation for the space it holds at
//! every step, rather than for its peak space at every step.  This crate
//! implements the constructive objects that CM lower-bound arguments are
//! built from, and checks every claim about them that can be checked by
//! simulation, exhaustive search or closed-form evaluation:
//!
//! * [`dag`]: graph families (chains, pyramids, lattices and the
//!   lattice-plus-chain separation graph) with JSON I/O.
//! * [`pebbling`]: the black pebble game, the separation strategy and
//!   exhaustive optimal-pebbling searches.
//! * [`hashgraph`]: random-oracle labelling of a DAG, strategy-driven
//!   evaluation, ex post facto pebbling extraction and query auditing.
//! * [`bprog`]: layered branching programs, the rank/sort reductions, the
//!   three block decompositions and a RAM sorting harness.
//! * [`problems`]: reference functions, embedded rectangles and matrix
//!   rigidity.
//! * [`loss`]: the block-length loss function and its bound checks.
//! * [`opt`]: checked optimization lemmas and the `S*` solver.
//! * [`bounds`]: closed-form lower-bound calculators.
//! * [`experiment`]: batch experiments that write CSV/JSON artifacts.


pub mod bounds;
pub mod bprog;
pub mod dag;
mod error;
pub mod experiment;
pub mod hashgraph;
pub mod loss;
pub mod opt;
pub mod pebbling;
pub mod problems;

pub use error::{Error, Result};
