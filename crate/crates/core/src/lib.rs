//! Discrete-time quantum walks as generalized qubit measurements.
//!
//! A walk on a line with a position-dependent coin schedule turns a qubit
//! input into a distribution over output positions. This crate builds such
//! schedules for a target POVM, reads the POVM back from a schedule, lowers
//! coins onto half- and quarter-wave plates between beam displacers, and
//! simulates counting experiments with finite visibility and detector
//! efficiency.

pub mod error;
pub mod experiment;
pub mod json;
pub mod linalg;
pub mod optics;
pub mod povm;
pub mod scenario;
pub mod tolerance;
pub mod walk;

pub use error::{Error, Result};
pub use experiment::{sample_counts, simulate, usd_sweep, CountTable, ImperfectionConfig, SweepRow};
pub use linalg::{Mat2, Vec2};
pub use optics::{compile_netlist, decompose, OpticalNetlist, PlateKind, PlateSetting, QwpConvention};
pub use povm::{build_circuit, extract_povm, synthesize, IterationPair, PovmElement, PovmSet, Synthesis};
pub use scenario::Scenario;
pub use tolerance::Tolerances;
pub use walk::{evolve, run, Coin, CoinLayer, CoinOp, CoinSchedule, WalkState};
