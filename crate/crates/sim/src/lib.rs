//! Scenario loading, the experiment harness and result files for the RDZ simulator.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod harness;
pub mod output;
pub mod scenario;

pub use cache::SharedFieldCache;
pub use harness::{run_experiment, run_trial, run_trial_group, Experiment, ExperimentSettings, TrialRecord};
pub use scenario::{Scenario, ScenarioError};
