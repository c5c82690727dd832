//! Per-step evaluation metrics, the step reward and trial aggregation.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::{dbm_to_mw, mw_to_dbm};
use crate::propagation::{received_power, same_channel, FieldProvider, RfMap};
use crate::twin::{RdzState, Role, TwinError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no enabled endpoint to receive the mobile")]
    NoEndpoints,
    #[error("uptime of an empty trial")]
    EmptyTrial,
    #[error("reward needs a positive zone area, got {0}")]
    ZeroArea(f64),
    #[error("reward threshold {0} must be non-zero")]
    ZeroThreshold(&'static str),
    #[error(transparent)]
    Twin(#[from] TwinError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub leakage_points: usize,
    /// `-inf` when nothing leaked.
    pub leaked_power_dbm: f64,
    /// `-inf` when the mobile is off or has no victims.
    pub interference_dbm: f64,
    /// `None` when the mobile was disabled.
    pub mobile_sinr_db: Option<f64>,
    pub mobile_active: bool,
    pub step_valid: bool,
    pub reward: f64,
}

/// Count and dBm total of the cells in `outside` strictly above `threshold_dbm`.
pub fn leakage_in_map(map: &RfMap, outside: &[u32], threshold_dbm: f64) -> (usize, f64) {
    let thr = dbm_to_mw(threshold_dbm);
    let power = map.power_mw();
    let (n, sum) = outside
        .iter()
        .map(|&i| power[i as usize])
        .filter(|&p| p > thr)
        .fold((0usize, 0.0f64), |(n, s), p| (n + 1, s + p));
    (n, mw_to_dbm(sum))
}

/// Leakage of the enabled test transmitters, all channels combined. Equal to
/// [`leakage_in_map`] over the aggregate map, but only the cells outside the
/// zone are summed.
pub fn leakage_metrics(state: &RdzState, fields: &dyn FieldProvider) -> (usize, f64) {
    let outside = state.outside_cells();
    let mut power = vec![0.0f64; outside.len()];
    for tx in state.test_transmitters().filter(|t| t.enabled) {
        let field = fields.single_source(tx, state.rf(), state.grid());
        let mw = field.power_mw();
        for (p, &c) in power.iter_mut().zip(outside) {
            *p += mw[c as usize];
        }
    }
    let thr = dbm_to_mw(state.config().leakage_threshold);
    let (n, sum) = power
        .into_iter()
        .filter(|&p| p > thr)
        .fold((0usize, 0.0f64), |(n, s), p| (n + 1, s + p));
    (n, mw_to_dbm(sum))
}

/// `signal / (interference + noise)` in dB, all inputs in dBm.
pub fn sinr_db(signal_dbm: f64, interferers_dbm: impl IntoIterator<Item = f64>, noise_dbm: f64) -> f64 {
    let denom: f64 = interferers_dbm.into_iter().map(dbm_to_mw).sum::<f64>() + dbm_to_mw(noise_dbm);
    signal_dbm - mw_to_dbm(denom)
}

/// SINR of the mobile at its strongest endpoint. `Ok(None)` when it is disabled.
pub fn mobile_sinr(state: &RdzState, mobile_id: &str) -> Result<Option<f64>, MetricsError> {
    let mobile = state.transmitter(mobile_id)?;
    if !mobile.is_mobile() {
        return Err(TwinError::NotMobile(mobile_id.into()).into());
    }
    if !mobile.enabled {
        return Ok(None);
    }
    let (rf, grid) = (state.rf(), state.grid());
    let rx = state
        .fleet()
        .iter()
        .filter(|t| t.role == Role::Endpoint && t.enabled)
        .map(|e| (e, received_power(mobile, e.pos, e.height, e.gain, &rf.model, grid)))
        .fold(None, |best: Option<(_, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        });
    let Some((endpoint, signal)) = rx else {
        return Err(MetricsError::NoEndpoints);
    };
    let interferers = state
        .test_transmitters()
        .filter(|t| t.enabled && t.id != mobile.id && same_channel(t.frequency, mobile.frequency))
        .map(|t| received_power(t, endpoint.pos, endpoint.height, endpoint.gain, &rf.model, grid));
    Ok(Some(sinr_db(signal, interferers, state.config().noise_floor)))
}

/// Whether the mobile, judged as if it were on, breaks neither the leakage nor
/// the interference rule. Scenarios without a mobile have no valid steps.
pub fn mobile_compliant(state: &RdzState, fields: &dyn FieldProvider) -> bool {
    let Some(m) = state.mobile() else {
        return false;
    };
    matches!(state.detect_leakage(&m.id, fields), Ok(None))
        && matches!(state.detect_interference(&m.id), Ok(None))
}

/// Active-and-valid steps over valid steps; 1.0 when no step is valid.
pub fn uptime(steps: &[StepMetrics]) -> Result<f64, MetricsError> {
    if steps.is_empty() {
        return Err(MetricsError::EmptyTrial);
    }
    let valid = steps.iter().filter(|s| s.step_valid).count();
    let active = steps
        .iter()
        .filter(|s| s.step_valid && s.mobile_active)
        .count();
    Ok(if valid == 0 {
        1.0
    } else {
        active as f64 / valid as f64
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub clip_bound: f64,
    /// Penalise interference and leakage by `|threshold| / |value|`, so that
    /// stronger signals cost more, instead of the literal `value / threshold`.
    pub normalize_reward_signs: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            clip_bound: 10.0,
            normalize_reward_signs: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    /// Steps with the mobile enabled.
    pub u: f64,
    pub sinr_db: f64,
    pub interference_dbm: f64,
    pub interference_threshold: f64,
    pub leakage_points: f64,
    pub zone_area: f64,
    pub leaked_power_dbm: f64,
    pub leakage_threshold: f64,
    pub clip_bound: f64,
    pub normalize_reward_signs: bool,
}

impl RewardInputs {
    pub fn from_step(state: &RdzState, m: &StepMetrics, cfg: RewardConfig) -> Self {
        let c = state.config();
        Self {
            u: if m.mobile_active { 1.0 } else { 0.0 },
            sinr_db: m.mobile_sinr_db.unwrap_or(f64::NEG_INFINITY),
            interference_dbm: m.interference_dbm,
            interference_threshold: c.interference_threshold,
            leakage_points: m.leakage_points as f64,
            zone_area: state.zone_area() as f64,
            leaked_power_dbm: m.leaked_power_dbm,
            leakage_threshold: c.leakage_threshold,
            clip_bound: cfg.clip_bound,
            normalize_reward_signs: cfg.normalize_reward_signs,
        }
    }
}

fn ratio_term(value: f64, threshold: f64, normalize: bool) -> f64 {
    if !value.is_finite() {
        return 0.0;
    }
    if normalize {
        -(threshold.abs() / value.abs())
    } else {
        -(value / threshold)
    }
}

/// The five signed reward terms before clipping:
/// `[10 U, S / 30, -I / I_T, -P / A, -L / L_T]`.
pub fn reward_terms(r: &RewardInputs) -> Result<[f64; 5], MetricsError> {
    if !(r.zone_area > 0.0) {
        return Err(MetricsError::ZeroArea(r.zone_area));
    }
    if r.interference_threshold == 0.0 {
        return Err(MetricsError::ZeroThreshold("interference"));
    }
    if r.leakage_threshold == 0.0 {
        return Err(MetricsError::ZeroThreshold("leakage"));
    }
    let s = if r.sinr_db.is_finite() { r.sinr_db / 30.0 } else { 0.0 };
    Ok([
        10.0 * r.u,
        s,
        ratio_term(r.interference_dbm, r.interference_threshold, r.normalize_reward_signs),
        -(r.leakage_points / r.zone_area),
        ratio_term(r.leaked_power_dbm, r.leakage_threshold, r.normalize_reward_signs),
    ])
}

/// Sum of the reward terms, each clipped to `±clip_bound`.
pub fn step_reward(r: &RewardInputs) -> Result<f64, MetricsError> {
    let b = r.clip_bound.abs();
    Ok(reward_terms(r)?.iter().map(|t| t.clamp(-b, b)).sum())
}

/// Phase-four measurement of a step already acted on.
pub fn measure_step(
    state: &RdzState,
    fields: &dyn FieldProvider,
    reward: RewardConfig,
) -> Result<StepMetrics, MetricsError> {
    let (leakage_points, leaked_power_dbm) = leakage_metrics(state, fields);
    let mobile = state.mobile();
    let interference_dbm = mobile.map_or(f64::NEG_INFINITY, |m| state.induced_interference(m, false));
    let mobile_sinr_db = match mobile {
        Some(m) => mobile_sinr(state, &m.id)?,
        None => None,
    };
    let mut m = StepMetrics {
        leakage_points,
        leaked_power_dbm,
        interference_dbm,
        mobile_sinr_db,
        mobile_active: mobile.is_some_and(|m| m.enabled),
        step_valid: mobile_compliant(state, fields),
        reward: 0.0,
    };
    m.reward = step_reward(&RewardInputs::from_step(state, &m, reward))?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub total_leakage_points: usize,
    pub total_leaked_power_dbm: f64,
    pub total_interference_dbm: f64,
    pub sinr_samples: Vec<f64>,
    pub uptime: f64,
    pub total_reward: f64,
}

impl TrialSummary {
    pub fn from_steps(steps: &[StepMetrics]) -> Result<Self, MetricsError> {
        let lin = |f: fn(&StepMetrics) -> f64| mw_to_dbm(steps.iter().map(|s| dbm_to_mw(f(s))).sum());
        Ok(Self {
            total_leakage_points: steps.iter().map(|s| s.leakage_points).sum(),
            total_leaked_power_dbm: lin(|s| s.leaked_power_dbm),
            total_interference_dbm: lin(|s| s.interference_dbm),
            sinr_samples: steps.iter().filter_map(|s| s.mobile_sinr_db).collect(),
            uptime: uptime(steps)?,
            total_reward: steps.iter().map(|s| s.reward).sum(),
        })
    }

    pub fn sinr_mean(&self) -> Option<f64> {
        let n = self.sinr_samples.len();
        (n > 0).then(|| self.sinr_samples.iter().sum::<f64>() / n as f64)
    }

    /// Sample standard deviation; `None` below two samples.
    pub fn sinr_std(&self) -> Option<f64> {
        let n = self.sinr_samples.len();
        let mean = self.sinr_mean()?;
        (n > 1).then(|| {
            let ss: f64 = self.sinr_samples.iter().map(|s| (s - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        })
    }

    pub fn sinr_fraction_above(&self, db: f64) -> Option<f64> {
        let n = self.sinr_samples.len();
        (n > 0).then(|| self.sinr_samples.iter().filter(|&&s| s > db).count() as f64 / n as f64)
    }
}
