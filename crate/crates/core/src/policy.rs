//! Step policies: deterministic HTN, HTN with per-action skips, random and naive.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{apply_action, plan_actions, plan_maintenance, AtomicAction, MaintenanceGoal};
use crate::propagation::FieldProvider;
use crate::twin::RdzState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("unknown policy {0:?} (expected htn, htn-<eps>, random or naive)")]
    Unknown(String),
    #[error("skip probability {0} outside [0, 1)")]
    BadEpsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    Htn,
    /// Plans like [`Htn`](Self::Htn) but skips each action with probability `epsilon`.
    StochasticHtn { epsilon: f64 },
    Random,
    Naive,
}

impl PolicyKind {
    pub fn stochastic(epsilon: f64) -> Result<Self, PolicyError> {
        if (0.0..1.0).contains(&epsilon) {
            Ok(PolicyKind::StochasticHtn { epsilon })
        } else {
            Err(PolicyError::BadEpsilon(epsilon))
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Htn => f.write_str("htn"),
            PolicyKind::StochasticHtn { epsilon } => write!(f, "htn-{epsilon}"),
            PolicyKind::Random => f.write_str("random"),
            PolicyKind::Naive => f.write_str("naive"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "htn" => Ok(PolicyKind::Htn),
            "random" => Ok(PolicyKind::Random),
            "naive" => Ok(PolicyKind::Naive),
            other => {
                let eps = other
                    .strip_prefix("htn-")
                    .and_then(|e| e.parse::<f64>().ok())
                    .ok_or_else(|| PolicyError::Unknown(other.to_string()))?;
                PolicyKind::stochastic(eps)
            }
        }
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = PolicyError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(p: PolicyKind) -> String {
        p.to_string()
    }
}

/// Audit record of one policy decision.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDecision {
    pub planned: Vec<AtomicAction>,
    pub executed: Vec<AtomicAction>,
    pub skipped: Vec<AtomicAction>,
    /// Planning failure, if any; nothing is executed in that case.
    pub error: Option<String>,
    /// Planned actions that failed when executed on the live state.
    pub discrepancies: usize,
}

/// Let `policy` observe `state` and act on it in place.
pub fn decide_and_act<R: Rng + ?Sized>(
    policy: PolicyKind,
    state: &mut RdzState,
    goal: &MaintenanceGoal,
    fields: &dyn FieldProvider,
    rng: &mut R,
) -> StepDecision {
    let mut d = StepDecision::default();
    match policy {
        PolicyKind::Naive => {}
        PolicyKind::Random => {
            let code = rng.random_range(0..4u8);
            let action = match state.mobile() {
                Some(m) => AtomicAction::from_code(code, &m.id.clone()),
                None => Some(AtomicAction::Idle),
            }
            .unwrap_or(AtomicAction::Idle);
            execute(state, action.clone(), &mut d);
            d.planned.push(action);
        }
        PolicyKind::Htn | PolicyKind::StochasticHtn { .. } => {
            let plan = match plan_maintenance(state, goal, fields) {
                Ok(p) => p,
                Err(e) => {
                    d.error = Some(format!("{e}"));
                    return d;
                }
            };
            d.planned = plan_actions(&plan);
            let epsilon = match policy {
                PolicyKind::StochasticHtn { epsilon } => Some(epsilon),
                _ => None,
            };
            for action in d.planned.clone() {
                if epsilon.is_some_and(|e| rng.random::<f64>() < e) {
                    d.skipped.push(action);
                } else {
                    execute(state, action, &mut d);
                }
            }
        }
    }
    d
}

fn execute(state: &mut RdzState, action: AtomicAction, d: &mut StepDecision) {
    match apply_action(state, &action) {
        Ok(()) => d.executed.push(action),
        Err(_) => d.discrepancies += 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["htn", "htn-0.1", "htn-0.3", "random", "naive", "htn-0"] {
            assert_eq!(s.parse::<PolicyKind>().unwrap().to_string(), s);
        }
        assert_eq!("htn-1".parse::<PolicyKind>(), Err(PolicyError::BadEpsilon(1.0)));
        assert!("ppo".parse::<PolicyKind>().is_err());
        assert!("htn-x".parse::<PolicyKind>().is_err());
    }
}
