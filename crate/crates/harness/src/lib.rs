//! Experiment harness: replicated runs over all algorithms, inclusion-level
//! and dimension sweeps, grid search for the greedy baselines, and CSV output.

pub mod commands;
pub mod error;
pub mod output;
pub mod runner;
pub mod spec;
pub mod sweep;
pub mod tuning;

pub use error::{HarnessError, Result};
pub use runner::{run_replicated, run_single, Experiment, RunOutcome};
pub use spec::{AlgorithmSpec, ExperimentSpec, GridSpec, Profile};
