//! The zone's world state and its digital twin.
//!
//! [`RdzState`] is a plain value: cloning it yields an independent twin that
//! can be driven through candidate actions without touching the live state.
//! The terrain is shared behind an `Arc` since it never changes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{apply_action, AtomicAction};
use crate::geo::{GeoError, Grid, GridPos, ZoneBoundary};
use crate::power::{dbm_to_mw, mw_to_dbm};
use crate::propagation::{received_power, same_channel, FieldProvider, PropagationError, RfSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwinError {
    #[error("unknown transmitter `{0}`")]
    UnknownTransmitter(String),
    #[error("transmitter `{0}` is an endpoint, not a test transmitter")]
    NotATestTransmitter(String),
    #[error("transmitter `{0}` is not a mobile test transmitter")]
    NotMobile(String),
    #[error("duplicate transmitter id `{0}`")]
    DuplicateId(String),
    #[error("transmitter `{id}`: {reason}")]
    BadTransmitter { id: String, reason: String },
    #[error("channel set is empty")]
    EmptyChannelSet,
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Fixed receiver; never attributed leakage, never a test emitter.
    Endpoint,
    StationaryTest,
    MobileTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub id: String,
    pub role: Role,
    pub pos: GridPos,
    /// Antenna height above terrain, meters.
    pub height: f64,
    /// dBm.
    pub tx_power: f64,
    /// dBi.
    pub gain: f64,
    /// MHz.
    pub frequency: f64,
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoint: Option<GridPos>,
}

impl Transmitter {
    pub fn new(
        id: impl Into<String>,
        role: Role,
        pos: GridPos,
        height: f64,
        tx_power: f64,
        gain: f64,
        frequency: f64,
    ) -> Self {
        Self {
            id: id.into(),
            role,
            pos,
            height,
            tx_power,
            gain,
            frequency,
            enabled: true,
            waypoint: None,
        }
    }

    pub fn is_test(&self) -> bool {
        self.role != Role::Endpoint
    }

    pub fn is_mobile(&self) -> bool {
        self.role == Role::MobileTest
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RdzConfig {
    /// Leakage threshold, dBm.
    pub leakage_threshold: f64,
    /// Interference threshold, dBm.
    pub interference_threshold: f64,
    /// Ordered channel list in MHz; round-robin retuning cycles through it.
    pub channel_set: Vec<f64>,
    /// dBm.
    pub noise_floor: f64,
    /// Whether endpoints count among the mobile's interference victims.
    pub endpoints_as_victims: bool,
    /// Mobile displacement per step, cells.
    pub move_distance: f64,
}

impl Default for RdzConfig {
    fn default() -> Self {
        Self {
            leakage_threshold: -95.0,
            interference_threshold: -70.0,
            channel_set: vec![3600.0, 3610.0, 3620.0],
            noise_floor: -100.0,
            endpoints_as_victims: true,
            move_distance: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Leakage,
    Interference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub offender_id: String,
    /// dB above the threshold; always positive.
    pub magnitude: f64,
}

/// Serializable view of a state without the terrain raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub step: u64,
    pub zone: ZoneBoundary,
    pub config: RdzConfig,
    pub rf: RfSettings,
    pub fleet: Vec<Transmitter>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdzState {
    grid: Arc<Grid>,
    zone: ZoneBoundary,
    outside: Arc<Vec<u32>>,
    zone_area: usize,
    config: RdzConfig,
    rf: RfSettings,
    fleet: Vec<Transmitter>,
    step: u64,
}

impl RdzState {
    pub fn new(
        grid: Arc<Grid>,
        zone: ZoneBoundary,
        config: RdzConfig,
        rf: RfSettings,
        fleet: Vec<Transmitter>,
    ) -> Result<Self, TwinError> {
        if config.channel_set.is_empty() {
            return Err(TwinError::EmptyChannelSet);
        }
        rf.model.validate()?;
        zone.check_bounds(&grid)?;
        let mut state = Self {
            outside: Arc::new(Vec::new()),
            zone_area: 0,
            grid,
            zone,
            config,
            rf,
            fleet: Vec::new(),
            step: 0,
        };
        state.refresh_zone_cache();
        for tx in fleet {
            state.add_transmitter(tx)?;
        }
        Ok(state)
    }

    pub fn from_snapshot(grid: Arc<Grid>, snap: StateSnapshot) -> Result<Self, TwinError> {
        let mut s = Self::new(grid, snap.zone, snap.config, snap.rf, snap.fleet)?;
        s.step = snap.step;
        Ok(s)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            step: self.step,
            zone: self.zone.clone(),
            config: self.config.clone(),
            rf: self.rf,
            fleet: self.fleet.clone(),
        }
    }

    fn refresh_zone_cache(&mut self) {
        self.outside = Arc::new(self.zone.outside_cells(&self.grid));
        self.zone_area = self.grid.cell_count() - self.outside.len();
    }

    fn check_transmitter(&self, tx: &Transmitter) -> Result<(), TwinError> {
        let bad = |reason: &str| TwinError::BadTransmitter {
            id: tx.id.clone(),
            reason: reason.to_string(),
        };
        if !(tx.height > 0.0) || !tx.height.is_finite() {
            return Err(bad("height must be positive"));
        }
        if !tx.tx_power.is_finite() || !tx.gain.is_finite() {
            return Err(bad("power and gain must be finite"));
        }
        if !self.config.channel_set.iter().any(|c| same_channel(*c, tx.frequency)) {
            return Err(bad(&format!("frequency {} MHz not in the channel set", tx.frequency)));
        }
        if !self.grid.in_bounds(tx.pos) {
            return Err(bad("position outside the grid"));
        }
        if tx.waypoint.is_some_and(|w| !self.grid.in_bounds(w)) {
            return Err(bad("waypoint outside the grid"));
        }
        Ok(())
    }

    pub fn add_transmitter(&mut self, tx: Transmitter) -> Result<(), TwinError> {
        if self.fleet.iter().any(|t| t.id == tx.id) {
            return Err(TwinError::DuplicateId(tx.id));
        }
        self.check_transmitter(&tx)?;
        self.fleet.push(tx);
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<Grid> {
        self.grid.clone()
    }

    pub fn zone(&self) -> &ZoneBoundary {
        &self.zone
    }

    pub fn set_zone(&mut self, zone: ZoneBoundary) -> Result<(), TwinError> {
        zone.check_bounds(&self.grid)?;
        self.zone = zone;
        self.refresh_zone_cache();
        Ok(())
    }

    /// Indices of cells outside the zone.
    pub fn outside_cells(&self) -> &[u32] {
        &self.outside
    }

    /// Zone area in cells.
    pub fn zone_area(&self) -> usize {
        self.zone_area
    }

    pub fn config(&self) -> &RdzConfig {
        &self.config
    }

    pub fn rf(&self) -> &RfSettings {
        &self.rf
    }

    pub fn fleet(&self) -> &[Transmitter] {
        &self.fleet
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn transmitter(&self, id: &str) -> Result<&Transmitter, TwinError> {
        self.fleet
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| TwinError::UnknownTransmitter(id.to_string()))
    }

    /// Mutable access to one transmitter. The id must not be changed.
    pub fn transmitter_mut(&mut self, id: &str) -> Result<&mut Transmitter, TwinError> {
        self.fleet
            .iter_mut()
            .find(|t| t.id == id)
            .ok_or_else(|| TwinError::UnknownTransmitter(id.to_string()))
    }

    /// The first mobile test transmitter, which the metrics track.
    pub fn mobile(&self) -> Option<&Transmitter> {
        self.fleet.iter().find(|t| t.is_mobile())
    }

    pub fn test_transmitters(&self) -> impl Iterator<Item = &Transmitter> {
        self.fleet.iter().filter(|t| t.is_test())
    }

    /// Leakage check for one test transmitter, evaluated as if it were enabled.
    pub fn detect_leakage(
        &self,
        id: &str,
        fields: &dyn FieldProvider,
    ) -> Result<Option<Violation>, TwinError> {
        let tx = self.transmitter(id)?;
        if !tx.is_test() {
            return Err(TwinError::NotATestTransmitter(id.to_string()));
        }
        let field = fields.single_source(tx, &self.rf, &self.grid);
        let peak = mw_to_dbm(field.max_over(&self.outside));
        let over = peak - self.config.leakage_threshold;
        Ok((over > 0.0).then(|| Violation {
            kind: ViolationKind::Leakage,
            offender_id: tx.id.clone(),
            magnitude: over,
        }))
    }

    /// Receivers exposed to `mobile`: enabled co-channel fleet members inside the
    /// zone, other than mobiles (and endpoints unless configured as victims).
    pub fn interference_victims<'a>(
        &'a self,
        mobile: &'a Transmitter,
    ) -> impl Iterator<Item = &'a Transmitter> + 'a {
        self.fleet.iter().filter(move |r| {
            r.id != mobile.id
                && r.enabled
                && !r.is_mobile()
                && (r.role != Role::Endpoint || self.config.endpoints_as_victims)
                && same_channel(r.frequency, mobile.frequency)
                && self.zone.contains(r.pos)
        })
    }

    /// Aggregate power (dBm) the mobile induces at its victims. With
    /// `as_if_enabled` false a disabled mobile induces nothing.
    pub fn induced_interference(&self, mobile: &Transmitter, as_if_enabled: bool) -> f64 {
        if !as_if_enabled && !mobile.enabled {
            return f64::NEG_INFINITY;
        }
        let total: f64 = self
            .interference_victims(mobile)
            .map(|r| {
                dbm_to_mw(received_power(
                    mobile,
                    r.pos,
                    r.height,
                    r.gain,
                    &self.rf.model,
                    &self.grid,
                ))
            })
            .sum();
        mw_to_dbm(total)
    }

    /// Interference check for a mobile, evaluated as if it were enabled.
    pub fn detect_interference(&self, mobile_id: &str) -> Result<Option<Violation>, TwinError> {
        let mobile = self.transmitter(mobile_id)?;
        if !mobile.is_mobile() {
            return Err(TwinError::NotMobile(mobile_id.to_string()));
        }
        let over = self.induced_interference(mobile, true) - self.config.interference_threshold;
        Ok((over > 0.0).then(|| Violation {
            kind: ViolationKind::Interference,
            offender_id: mobile.id.clone(),
            magnitude: over,
        }))
    }

    /// Every violation currently attributable: leakage for each enabled test
    /// transmitter and interference for each enabled mobile.
    pub fn violations(&self, fields: &dyn FieldProvider) -> Vec<Violation> {
        let mut out = Vec::new();
        for tx in self.fleet.iter().filter(|t| t.is_test() && t.enabled) {
            if let Ok(Some(v)) = self.detect_leakage(&tx.id, fields) {
                out.push(v);
            }
            if tx.is_mobile() {
                if let Ok(Some(v)) = self.detect_interference(&tx.id) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// A fresh twin with `action` applied; `self` is untouched.
    pub fn twin_apply(&self, action: &AtomicAction) -> Result<RdzState, TwinError> {
        let mut twin = self.clone();
        apply_action(&mut twin, action)?;
        Ok(twin)
    }

    /// Move every mobile one step and advance the clock. One angle is drawn per
    /// mobile per step whether or not it follows a waypoint, so the random
    /// stream does not depend on control decisions.
    pub fn advance_mobility<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let d = self.config.move_distance;
        for tx in self.fleet.iter_mut().filter(|t| t.is_mobile()) {
            let angle = rng.random::<f64>() * TAU;
            let next = match tx.waypoint {
                Some(w) => {
                    let dist = tx.pos.cell_distance(w);
                    if dist <= d {
                        tx.waypoint = None;
                        w
                    } else {
                        GridPos::new(
                            tx.pos.x + d * (w.x - tx.pos.x) / dist,
                            tx.pos.y + d * (w.y - tx.pos.y) / dist,
                        )
                    }
                }
                None => GridPos::new(tx.pos.x + d * angle.cos(), tx.pos.y + d * angle.sin()),
            };
            tx.pos = self.grid.clamp(next);
        }
        self.step += 1;
    }

    /// Value-returning form of [`advance_mobility`](Self::advance_mobility).
    pub fn advanced<R: Rng + ?Sized>(&self, rng: &mut R) -> RdzState {
        let mut next = self.clone();
        next.advance_mobility(rng);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{single_source_map, LocalFieldCache, PropagationModel, Uncached};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(fleet: Vec<Transmitter>) -> RdzState {
        let grid = Arc::new(Grid::flat(200, 200, 10.0).unwrap());
        let zone = ZoneBoundary::rect(50.0, 50.0, 150.0, 150.0, &grid).unwrap();
        let rf = RfSettings {
            model: PropagationModel::log_distance(3.0),
            ..RfSettings::default()
        };
        RdzState::new(grid, zone, RdzConfig::default(), rf, fleet).unwrap()
    }

    fn stationary(id: &str, x: f64, y: f64, power: f64) -> Transmitter {
        Transmitter::new(id, Role::StationaryTest, GridPos::new(x, y), 30.0, power, 4.9, 3600.0)
    }

    fn mobile(x: f64, y: f64, f: f64) -> Transmitter {
        Transmitter::new("m", Role::MobileTest, GridPos::new(x, y), 30.0, 30.0, 4.9, f)
    }

    #[test]
    fn quiet_transmitter_does_not_leak() {
        let s = base(vec![stationary("a", 100.0, 100.0, -40.0)]);
        let field = single_source_map(&s.fleet()[0], s.rf(), s.grid());
        let peak = mw_to_dbm(field.max_over(s.outside_cells()));
        assert!(peak < -95.0, "{peak}");
        assert_eq!(s.detect_leakage("a", &Uncached).unwrap(), None);
    }

    #[test]
    fn boundary_transmitter_leaks_even_when_disabled() {
        let mut s = base(vec![stationary("a", 151.0, 100.0, 40.0)]);
        let field = single_source_map(&s.fleet()[0], s.rf(), s.grid());
        let scan = s
            .outside_cells()
            .iter()
            .map(|&i| field.power_mw()[i as usize])
            .fold(0.0, f64::max);
        let v = s.detect_leakage("a", &Uncached).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::Leakage);
        assert!((v.magnitude - (mw_to_dbm(scan) + 95.0)).abs() < 1e-9);
        s.transmitter_mut("a").unwrap().enabled = false;
        assert_eq!(s.detect_leakage("a", &Uncached).unwrap(), Some(v));
    }

    #[test]
    fn leakage_errors() {
        let mut ep = stationary("e", 100.0, 100.0, 30.0);
        ep.role = Role::Endpoint;
        let s = base(vec![ep]);
        assert_eq!(
            s.detect_leakage("e", &Uncached),
            Err(TwinError::NotATestTransmitter("e".into()))
        );
        assert_eq!(
            s.detect_leakage("zz", &Uncached),
            Err(TwinError::UnknownTransmitter("zz".into()))
        );
    }

    #[test]
    fn interference_cases() {
        // No receivers at all.
        let s = base(vec![mobile(100.0, 100.0, 3600.0)]);
        assert_eq!(s.detect_interference("m").unwrap(), None);
        assert_eq!(s.induced_interference(&s.fleet()[0], true), f64::NEG_INFINITY);

        // One co-channel receiver; pick power so it sees exactly -50 dBm.
        let mut m = mobile(100.0, 100.0, 3600.0);
        let r = stationary("r", 103.0, 100.0, 30.0);
        let probe = received_power(&m, r.pos, r.height, r.gain, &PropagationModel::log_distance(3.0), &Grid::flat(200, 200, 10.0).unwrap());
        m.tx_power += -50.0 - probe;
        let s = base(vec![m.clone(), r.clone()]);
        let v = s.detect_interference("m").unwrap().unwrap();
        assert!((v.magnitude - 20.0).abs() < 1e-9);

        // Frequency isolation.
        m.frequency = 3620.0;
        let mut r2 = r.clone();
        r2.id = "r2".into();
        r2.frequency = 3610.0;
        let s = base(vec![m, r, r2]);
        assert_eq!(s.detect_interference("m").unwrap(), None);
        assert_eq!(s.detect_interference("r"), Err(TwinError::NotMobile("r".into())));
    }

    #[test]
    fn endpoint_victims_switch() {
        let m = mobile(100.0, 100.0, 3600.0);
        let mut ep = stationary("e", 101.0, 100.0, 30.0);
        ep.role = Role::Endpoint;
        let mut s = base(vec![m, ep]);
        assert!(s.detect_interference("m").unwrap().is_some());
        s.config.endpoints_as_victims = false;
        assert!(s.detect_interference("m").unwrap().is_none());
    }

    #[test]
    fn twin_isolation() {
        let s = base(vec![stationary("a", 100.0, 100.0, 30.0)]);
        let before = s.snapshot();
        let t = s.twin_apply(&AtomicAction::Disable("a".into())).unwrap();
        assert!(s.fleet()[0].enabled);
        assert!(!t.fleet()[0].enabled);
        assert_eq!(s.snapshot(), before);
        assert_eq!(s.twin_apply(&AtomicAction::Idle).unwrap(), s);
        assert!(s.twin_apply(&AtomicAction::Enable("nope".into())).is_err());
    }

    #[test]
    fn mobility_step_length_and_clamp() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = base(vec![mobile(100.0, 100.0, 3600.0)]);
        for _ in 0..200 {
            let before = s.fleet()[0].pos;
            let raw_ok = before.x > 6.0 && before.y > 6.0 && before.x < 193.0 && before.y < 193.0;
            s.advance_mobility(&mut rng);
            let after = s.fleet()[0].pos;
            if raw_ok {
                assert!((before.cell_distance(after) - 5.0).abs() < 1e-9);
            }
            assert!(s.grid().in_bounds(after));
        }
        assert_eq!(s.step(), 200);

        let mut edge = base(vec![mobile(0.0, 0.0, 3600.0)]);
        for _ in 0..20 {
            edge.advance_mobility(&mut rng);
            assert!(edge.grid().in_bounds(edge.fleet()[0].pos));
        }
    }

    #[test]
    fn mobility_is_seeded() {
        let s = base(vec![mobile(100.0, 100.0, 3600.0)]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut st = s.clone();
            (0..30)
                .map(|_| {
                    st.advance_mobility(&mut rng);
                    st.fleet()[0].pos
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn waypoint_travel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = mobile(10.0, 10.0, 3600.0);
        m.waypoint = Some(GridPos::new(22.0, 10.0));
        let mut s = base(vec![m]);
        s.advance_mobility(&mut rng);
        assert!((s.fleet()[0].pos.x - 15.0).abs() < 1e-12);
        s.advance_mobility(&mut rng);
        s.advance_mobility(&mut rng);
        assert_eq!(s.fleet()[0].pos, GridPos::new(22.0, 10.0));
        assert_eq!(s.fleet()[0].waypoint, None);
    }

    #[test]
    fn construction_checks() {
        let grid = Arc::new(Grid::flat(50, 50, 10.0).unwrap());
        let zone = ZoneBoundary::rect(5.0, 5.0, 45.0, 45.0, &grid).unwrap();
        let cfg = RdzConfig::default();
        let dup = vec![stationary("a", 1.0, 1.0, 0.0), stationary("a", 2.0, 2.0, 0.0)];
        assert_eq!(
            RdzState::new(grid.clone(), zone.clone(), cfg.clone(), RfSettings::default(), dup),
            Err(TwinError::DuplicateId("a".into()))
        );
        let mut off = stationary("a", 1.0, 1.0, 0.0);
        off.frequency = 2400.0;
        assert!(RdzState::new(grid.clone(), zone.clone(), cfg.clone(), RfSettings::default(), vec![off]).is_err());
        let mut low = stationary("a", 1.0, 1.0, 0.0);
        low.height = 0.0;
        assert!(RdzState::new(grid.clone(), zone.clone(), cfg.clone(), RfSettings::default(), vec![low]).is_err());
        let empty = RdzConfig { channel_set: vec![], ..cfg };
        assert_eq!(
            RdzState::new(grid, zone, empty, RfSettings::default(), vec![]),
            Err(TwinError::EmptyChannelSet)
        );
    }

    #[test]
    fn snapshot_round_trip() {
        let s = base(vec![stationary("a", 100.0, 100.0, 30.0), mobile(80.0, 80.0, 3610.0)]);
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        let back: StateSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(RdzState::from_snapshot(s.shared_grid(), back).unwrap(), s);
    }

    #[test]
    fn cached_and_uncached_agree() {
        let s = base(vec![stationary("a", 148.0, 100.0, 20.0)]);
        let cache = LocalFieldCache::new(4);
        assert_eq!(
            s.detect_leakage("a", &cache).unwrap(),
            s.detect_leakage("a", &Uncached).unwrap()
        );
    }
}
