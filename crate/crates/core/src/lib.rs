//! Radio dynamic zone model: terrain and zone geometry, propagation, the
//! digital twin, a generic HTN planner, the zone-maintenance domain, policies
//! and evaluation metrics.
//!
//! Builds without `std`; enable the `parallel` feature to spread map
//! computation over rayon.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod domain;
pub mod geo;
pub mod htn;
pub mod metrics;
pub mod policy;
pub mod power;
pub mod propagation;
pub mod twin;

pub use domain::{apply_action, plan_actions, plan_maintenance, AtomicAction, MaintenanceGoal};
pub use geo::{Grid, GridPos, ZoneBoundary};
pub use metrics::{StepMetrics, TrialSummary};
pub use policy::{decide_and_act, PolicyKind, StepDecision};
pub use propagation::{FieldProvider, PropagationModel, RfMap, RfSettings};
pub use twin::{RdzConfig, RdzState, Role, Transmitter};
