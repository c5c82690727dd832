//! The closed control loop: move, sense, act, measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rdz_core::metrics::{measure_step, MetricsError, RewardConfig};
use rdz_core::twin::Violation;
use rdz_core::{
    decide_and_act, FieldProvider, GridPos, MaintenanceGoal, PolicyKind, RdzState, StepDecision,
    StepMetrics, TrialSummary,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOptions {
    /// Measure before the policy acts instead of after.
    pub measure_before_act: bool,
    pub reward: RewardConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    /// Violations sensed after the move, before the policy acted.
    pub sensed: Vec<Violation>,
    pub metrics: StepMetrics,
    pub decision: StepDecision,
}

/// One iteration of the control loop on `state`.
pub fn run_step<R: Rng + ?Sized>(
    state: &mut RdzState,
    policy: PolicyKind,
    goal: &MaintenanceGoal,
    fields: &dyn FieldProvider,
    mobility: &mut R,
    policy_rng: &mut R,
    opts: StepOptions,
) -> Result<StepOutcome, MetricsError> {
    state.advance_mobility(mobility);
    let sensed = state.violations(fields);
    let (metrics, decision) = if opts.measure_before_act {
        let m = measure_step(state, fields, opts.reward)?;
        (m, decide_and_act(policy, state, goal, fields, policy_rng))
    } else {
        let d = decide_and_act(policy, state, goal, fields, policy_rng);
        (measure_step(state, fields, opts.reward)?, d)
    };
    Ok(StepOutcome {
        sensed,
        metrics,
        decision,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    pub mobile_pos: GridPos,
    pub mobile_frequency: f64,
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub scenario_hash: String,
    pub policy: PolicyKind,
    pub trial: usize,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub summary: TrialSummary,
}

/// Streams are split from the master seed: stream 0 of each trial drives
/// mobility, and each policy label gets its own stream.
fn stream(seed: u64, trial: usize, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 32) | salt);
    rng
}

fn policy_salt(policy: PolicyKind) -> u64 {
    let d = Sha256::digest(policy.to_string().as_bytes());
    1 + (u32::from_le_bytes([d[0], d[1], d[2], d[3]]) >> 1) as u64
}

pub fn mobility_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    stream(seed, trial, 0)
}

pub fn policy_rng(seed: u64, trial: usize, policy: PolicyKind) -> ChaCha8Rng {
    stream(seed, trial, policy_salt(policy))
}

/// Starting state of a trial: mobiles with a start region are placed
/// uniformly inside it using the trial's mobility stream.
pub fn initial_state(scn: &Scenario, mobility: &mut ChaCha8Rng) -> RdzState {
    let mut state = scn.state.clone();
    for (id, [x0, y0, x1, y1]) in &scn.start_regions {
        let x = if x1 > x0 { mobility.random_range(*x0..*x1) } else { *x0 };
        let y = if y1 > y0 { mobility.random_range(*y0..*y1) } else { *y0 };
        if let Ok(tx) = state.transmitter_mut(id) {
            tx.pos = GridPos::new(x, y);
        }
    }
    state
}

fn goal_at(scn: &Scenario, step: u64) -> MaintenanceGoal {
    MaintenanceGoal {
        incumbent_request: scn.requests.iter().find(|r| r.step == step).map(|r| r.zone.clone()),
    }
}

/// Run one trial for several policies in lockstep. Every policy sees the same
/// start and the same mobility draws, and at each step all of them query the
/// field cache for the same mobile position.
pub fn run_trial_group(
    scn: &Scenario,
    policies: &[PolicyKind],
    trial: usize,
    steps: usize,
    seed: u64,
    fields: &(dyn FieldProvider + Sync),
) -> Result<Vec<TrialRecord>, MetricsError> {
    let mut mobility = mobility_rng(seed, trial);
    let start = initial_state(scn, &mut mobility);
    let opts = StepOptions {
        measure_before_act: scn.measure_before_act,
        reward: scn.reward,
    };
    struct Lane {
        policy: PolicyKind,
        state: RdzState,
        mobility: ChaCha8Rng,
        rng: ChaCha8Rng,
        steps: Vec<StepRecord>,
    }
    let mut lanes: Vec<Lane> = policies
        .iter()
        .map(|&policy| Lane {
            policy,
            state: start.clone(),
            mobility: mobility.clone(),
            rng: policy_rng(seed, trial, policy),
            steps: Vec::with_capacity(steps),
        })
        .collect();

    for _ in 0..steps {
        for lane in &mut lanes {
            let goal = goal_at(scn, lane.state.step() + 1);
            let outcome = run_step(
                &mut lane.state,
                lane.policy,
                &goal,
                fields,
                &mut lane.mobility,
                &mut lane.rng,
                opts,
            )?;
            let mobile = lane.state.mobile().expect("scenarios have one mobile");
            lane.steps.push(StepRecord {
                step: lane.state.step(),
                mobile_pos: mobile.pos,
                mobile_frequency: mobile.frequency,
                outcome,
            });
        }
    }

    lanes
        .into_iter()
        .map(|lane| {
            let metrics: Vec<StepMetrics> = lane.steps.iter().map(|s| s.outcome.metrics.clone()).collect();
            Ok(TrialRecord {
                scenario_hash: scn.hash.clone(),
                policy: lane.policy,
                trial,
                seed,
                summary: TrialSummary::from_steps(&metrics)?,
                steps: lane.steps,
            })
        })
        .collect()
}

pub fn run_trial(
    scn: &Scenario,
    policy: PolicyKind,
    trial: usize,
    fields: &(dyn FieldProvider + Sync),
) -> Result<TrialRecord, MetricsError> {
    Ok(run_trial_group(scn, &[policy], trial, scn.steps, scn.seed, fields)?.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub policies: Vec<PolicyKind>,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
}

impl ExperimentSettings {
    pub fn from_scenario(scn: &Scenario) -> Self {
        Self {
            policies: scn.policies.clone(),
            trials: scn.trials,
            steps: scn.steps,
            seed: scn.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub settings: ExperimentSettings,
    /// Ordered by trial, then by policy as listed in the settings.
    pub records: Vec<TrialRecord>,
}

impl Experiment {
    pub fn records_for(&self, policy: PolicyKind) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.policy == policy)
    }

    pub fn record(&self, policy: PolicyKind, trial: usize) -> Option<&TrialRecord> {
        self.records.iter().find(|r| r.policy == policy && r.trial == trial)
    }
}

/// Every policy over every trial. Trials run in parallel; results do not
/// depend on scheduling.
pub fn run_experiment(
    scn: &Scenario,
    settings: ExperimentSettings,
    fields: &(dyn FieldProvider + Sync),
) -> Result<Experiment, MetricsError> {
    let groups: Vec<Vec<TrialRecord>> = (0..settings.trials)
        .into_par_iter()
        .map(|t| run_trial_group(scn, &settings.policies, t, settings.steps, settings.seed, fields))
        .collect::<Result<_, _>>()?;
    Ok(Experiment {
        settings,
        records: groups.into_iter().flatten().collect(),
    })
}
