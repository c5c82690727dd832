//! Analytic path-loss models and received-power fields.
//!
//! Path loss splits into a geometric part (distance and terrain) and a
//! frequency term, `PL = G(d) + 20 log10(f_MHz) - 27.55` with `d` in meters.
//! Fields are built from a per-transmitter geometry raster so a retuned or
//! re-powered transmitter only needs a rescale, never a new terrain walk.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::sync::atomic::{AtomicUsize, Ordering};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{distance_3d, Grid, GridPos};
use crate::power::{dbm_to_mw, mw_to_dbm};
use crate::twin::Transmitter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("frequency must be positive, got {0} MHz")]
    BadFrequency(f64),
    #[error("path-loss exponent {0} outside [1.6, 6.5]")]
    BadExponent(f64),
    #[error("reference distance must be positive, got {0} m")]
    BadReferenceDistance(f64),
    #[error("obstruction penalty and cap must be non-negative")]
    BadObstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    FreeSpace,
    LogDistance,
    TerrainAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationModel {
    pub kind: ModelKind,
    pub path_loss_exponent: f64,
    /// Meters.
    pub reference_distance: f64,
    /// dB per obstructed cell.
    pub obstruction_penalty: f64,
    /// Total obstruction loss ceiling in dB.
    pub obstruction_cap: f64,
}

impl Default for PropagationModel {
    fn default() -> Self {
        Self {
            kind: ModelKind::LogDistance,
            path_loss_exponent: 3.0,
            reference_distance: 1.0,
            obstruction_penalty: 0.5,
            obstruction_cap: 40.0,
        }
    }
}

impl PropagationModel {
    pub fn free_space() -> Self {
        Self {
            kind: ModelKind::FreeSpace,
            path_loss_exponent: 2.0,
            ..Self::default()
        }
    }

    pub fn log_distance(exponent: f64) -> Self {
        Self {
            kind: ModelKind::LogDistance,
            path_loss_exponent: exponent,
            ..Self::default()
        }
    }

    pub fn terrain_aware(exponent: f64) -> Self {
        Self {
            kind: ModelKind::TerrainAware,
            path_loss_exponent: exponent,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PropagationError> {
        if !(1.6..=6.5).contains(&self.path_loss_exponent) {
            return Err(PropagationError::BadExponent(self.path_loss_exponent));
        }
        if !(self.reference_distance > 0.0) || !self.reference_distance.is_finite() {
            return Err(PropagationError::BadReferenceDistance(self.reference_distance));
        }
        if !(self.obstruction_penalty >= 0.0) || !(self.obstruction_cap >= 0.0) {
            return Err(PropagationError::BadObstruction);
        }
        Ok(())
    }

    fn obstruction_cells_cap(&self) -> usize {
        if self.kind != ModelKind::TerrainAware || self.obstruction_penalty <= 0.0 {
            0
        } else {
            (self.obstruction_cap / self.obstruction_penalty).ceil() as usize
        }
    }

    /// Frequency-independent part of the loss between two antennas given by
    /// position and absolute height (terrain + mast).
    pub fn geometric_loss(
        &self,
        tx: GridPos,
        tx_abs_height: f64,
        rx: GridPos,
        rx_abs_height: f64,
        grid: &Grid,
    ) -> f64 {
        let base = self.distance_loss(tx, tx_abs_height, rx, rx_abs_height, grid);
        let cap_cells = self.obstruction_cells_cap();
        if cap_cells == 0 {
            return base;
        }
        let blocked = grid.obstructed_cells(tx, tx_abs_height, rx, rx_abs_height, cap_cells);
        base + self.obstruction_loss(blocked)
    }

    fn distance_loss(&self, tx: GridPos, tx_abs_height: f64, rx: GridPos, rx_abs_height: f64, grid: &Grid) -> f64 {
        let d = distance_3d(tx, tx_abs_height, rx, rx_abs_height, grid).max(self.reference_distance);
        match self.kind {
            ModelKind::FreeSpace => 20.0 * d.log10(),
            ModelKind::LogDistance | ModelKind::TerrainAware => {
                20.0 * self.reference_distance.log10()
                    + 10.0 * self.path_loss_exponent * (d / self.reference_distance).log10()
            }
        }
    }

    fn obstruction_loss(&self, blocked: usize) -> f64 {
        (blocked as f64 * self.obstruction_penalty).min(self.obstruction_cap)
    }
}

#[inline]
fn frequency_term(freq_mhz: f64) -> f64 {
    20.0 * freq_mhz.log10() - 27.55
}

#[inline]
fn total_loss(geometric: f64, freq_mhz: f64) -> f64 {
    (geometric + frequency_term(freq_mhz)).max(0.0)
}

/// Path loss in dB between two antennas. Heights are meters above local terrain.
pub fn path_loss(
    model: &PropagationModel,
    tx: GridPos,
    tx_height: f64,
    rx: GridPos,
    rx_height: f64,
    freq_mhz: f64,
    grid: &Grid,
) -> Result<f64, PropagationError> {
    if !(freq_mhz > 0.0) || !freq_mhz.is_finite() {
        return Err(PropagationError::BadFrequency(freq_mhz));
    }
    let g = model.geometric_loss(
        tx,
        grid.elevation_at(tx) + tx_height,
        rx,
        grid.elevation_at(rx) + rx_height,
        grid,
    );
    Ok(total_loss(g, freq_mhz))
}

/// Power in dBm that `tx` delivers to a receiver at `rx` (height in meters
/// above terrain, gain in dBi). The enabled flag is not consulted.
pub fn received_power(
    tx: &Transmitter,
    rx: GridPos,
    rx_height: f64,
    rx_gain: f64,
    model: &PropagationModel,
    grid: &Grid,
) -> f64 {
    let g = model.geometric_loss(
        tx.pos,
        grid.elevation_at(tx.pos) + tx.height,
        rx,
        grid.elevation_at(rx) + rx_height,
        grid,
    );
    tx.tx_power + tx.gain + rx_gain - total_loss(g, tx.frequency)
}

/// Everything about the field computation that is not the transmitter: the
/// model and the probe receiver used for maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfSettings {
    pub model: PropagationModel,
    /// Probe antenna height above terrain, meters.
    pub probe_height: f64,
    /// Probe antenna gain, dBi.
    pub probe_gain: f64,
}

impl Default for RfSettings {
    fn default() -> Self {
        Self {
            model: PropagationModel::default(),
            probe_height: 1.5,
            probe_gain: 0.0,
        }
    }
}

/// Aggregate received power per cell, linear milliwatts.
#[derive(Debug, Clone, PartialEq)]
pub struct RfMap {
    width: usize,
    height: usize,
    pub frequency_filter: Option<f64>,
    power_mw: Vec<f64>,
}

impl RfMap {
    pub fn zeros(grid: &Grid, frequency_filter: Option<f64>) -> Self {
        Self {
            width: grid.width(),
            height: grid.height(),
            frequency_filter,
            power_mw: vec![0.0; grid.cell_count()],
        }
    }

    /// Build a map from raw linear values (row-major).
    pub fn from_mw(width: usize, height: usize, power_mw: Vec<f64>) -> Option<Self> {
        (power_mw.len() == width * height && power_mw.iter().all(|p| *p >= 0.0)).then_some(Self {
            width,
            height,
            frequency_filter: None,
            power_mw,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn power_mw(&self) -> &[f64] {
        &self.power_mw
    }

    pub fn mw(&self, x: usize, y: usize) -> f64 {
        self.power_mw[y * self.width + x]
    }

    pub fn dbm(&self, x: usize, y: usize) -> f64 {
        mw_to_dbm(self.mw(x, y))
    }

    /// Cell-wise linear sum.
    pub fn accumulate(&mut self, other: &RfMap) {
        debug_assert_eq!(self.power_mw.len(), other.power_mw.len());
        for (a, b) in self.power_mw.iter_mut().zip(&other.power_mw) {
            *a += *b;
        }
    }

    /// Largest linear value over the listed cells (0 when empty).
    pub fn max_over(&self, cells: &[u32]) -> f64 {
        cells
            .iter()
            .map(|&i| self.power_mw[i as usize])
            .fold(0.0, f64::max)
    }
}

#[cfg(feature = "parallel")]
fn fill_rows(out: &mut [f64], width: usize, row: impl Fn(usize, &mut [f64]) + Sync) {
    use rayon::prelude::*;
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, r)| row(y, r));
}

#[cfg(not(feature = "parallel"))]
fn fill_rows(out: &mut [f64], width: usize, row: impl Fn(usize, &mut [f64])) {
    for (y, r) in out.chunks_mut(width).enumerate() {
        row(y, r);
    }
}

/// Frequency-independent loss raster (dB) for one transmitter location.
pub fn geometry_field(
    pos: GridPos,
    height: f64,
    rf: &RfSettings,
    grid: &Grid,
) -> Vec<f64> {
    let tx_abs = grid.elevation_at(pos) + height;
    let elevation = grid.elevation();
    let width = grid.width();
    let model = &rf.model;
    let cap = model.obstruction_cells_cap();
    let lowest_rx = elevation.iter().cloned().fold(f64::INFINITY, f64::min) + rf.probe_height;
    let shadows = (cap > 0).then(|| grid.shadow_index(pos, tx_abs, lowest_rx));
    let mut out = vec![0.0; grid.cell_count()];
    fill_rows(&mut out, width, |y, row| {
        for (x, cell) in row.iter_mut().enumerate() {
            let rx = GridPos::new(x as f64, y as f64);
            let rx_abs = elevation[y * width + x] + rf.probe_height;
            let mut loss = model.distance_loss(pos, tx_abs, rx, rx_abs, grid);
            if let Some(index) = &shadows {
                loss += model.obstruction_loss(grid.obstructed_cells_indexed(index, tx_abs, rx, rx_abs, cap));
            }
            *cell = loss;
        }
    });
    out
}

fn field_from_geometry(tx: &Transmitter, rf: &RfSettings, geometry: &[f64], grid: &Grid) -> RfMap {
    let eirp = tx.tx_power + tx.gain + rf.probe_gain;
    let mut map = RfMap::zeros(grid, Some(tx.frequency));
    fill_rows(&mut map.power_mw, grid.width(), |y, row| {
        let base = y * grid.width();
        for (x, cell) in row.iter_mut().enumerate() {
            *cell = dbm_to_mw(eirp - total_loss(geometry[base + x], tx.frequency));
        }
    });
    map
}

/// Field of one transmitter measured by the probe, regardless of its enabled flag.
pub fn single_source_map(tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> RfMap {
    let geometry = geometry_field(tx.pos, tx.height, rf, grid);
    field_from_geometry(tx, rf, &geometry, grid)
}

/// Source of single-transmitter fields; implementations may memoize.
pub trait FieldProvider {
    fn single_source(&self, tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> Arc<RfMap>;
}

/// Computes every field from scratch.
#[derive(Debug, Default, Clone, Copy)]
pub struct Uncached;

impl FieldProvider for Uncached {
    fn single_source(&self, tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> Arc<RfMap> {
        Arc::new(single_source_map(tx, rf, grid))
    }
}

/// Sum of the fields of every enabled transmitter on `freq_filter` (all
/// frequencies when `None`), in fleet order.
pub fn compute_map<'a>(
    transmitters: impl IntoIterator<Item = &'a Transmitter>,
    freq_filter: Option<f64>,
    rf: &RfSettings,
    grid: &Grid,
    fields: &dyn FieldProvider,
) -> RfMap {
    let mut map = RfMap::zeros(grid, freq_filter);
    for tx in transmitters {
        if !tx.enabled || freq_filter.is_some_and(|f| !same_channel(f, tx.frequency)) {
            continue;
        }
        map.accumulate(&fields.single_source(tx, rf, grid));
    }
    map
}

pub fn same_channel(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct GeometryKey([u64; 10]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct FieldKey(GeometryKey, [u64; 4]);

fn geometry_key(tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> GeometryKey {
    let m = &rf.model;
    GeometryKey([
        grid.fingerprint(),
        tx.pos.x.to_bits(),
        tx.pos.y.to_bits(),
        tx.height.to_bits(),
        rf.probe_height.to_bits(),
        m.kind as u64,
        m.path_loss_exponent.to_bits(),
        m.reference_distance.to_bits(),
        m.obstruction_penalty.to_bits(),
        m.obstruction_cap.to_bits(),
    ])
}

fn field_key(tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> FieldKey {
    FieldKey(
        geometry_key(tx, rf, grid),
        [
            tx.tx_power.to_bits(),
            tx.gain.to_bits(),
            tx.frequency.to_bits(),
            rf.probe_gain.to_bits(),
        ],
    )
}

#[derive(Debug)]
struct Slot<T> {
    value: Arc<T>,
    last_used: AtomicUsize,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub field_hits: usize,
    pub field_misses: usize,
    pub geometry_hits: usize,
    pub geometry_misses: usize,
    pub evictions: usize,
}

/// Bounded LRU store of geometry rasters and single-source fields.
///
/// Lookups take `&self` so a reader lock is enough; inserts need `&mut self`.
#[derive(Debug)]
pub struct FieldCache {
    capacity: usize,
    clock: AtomicUsize,
    geometry: BTreeMap<GeometryKey, Slot<Vec<f64>>>,
    fields: BTreeMap<FieldKey, Slot<RfMap>>,
    field_hits: AtomicUsize,
    field_misses: AtomicUsize,
    geometry_hits: AtomicUsize,
    geometry_misses: AtomicUsize,
    evictions: usize,
}

impl FieldCache {
    /// `capacity` bounds each of the two tables separately.
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            clock: AtomicUsize::new(0),
            geometry: BTreeMap::new(),
            fields: BTreeMap::new(),
            field_hits: AtomicUsize::new(0),
            field_misses: AtomicUsize::new(0),
            geometry_hits: AtomicUsize::new(0),
            geometry_misses: AtomicUsize::new(0),
            evictions: 0,
        }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            field_hits: self.field_hits.load(Ordering::Relaxed),
            field_misses: self.field_misses.load(Ordering::Relaxed),
            geometry_hits: self.geometry_hits.load(Ordering::Relaxed),
            geometry_misses: self.geometry_misses.load(Ordering::Relaxed),
            evictions: self.evictions,
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    fn touch<T>(&self, slot: &Slot<T>) -> Arc<T> {
        let now = self.clock.fetch_add(1, Ordering::Relaxed);
        slot.last_used.store(now, Ordering::Relaxed);
        slot.value.clone()
    }

    fn lookup_field(&self, key: &FieldKey) -> Option<Arc<RfMap>> {
        let hit = self.fields.get(key).map(|s| self.touch(s));
        let counter = if hit.is_some() { &self.field_hits } else { &self.field_misses };
        counter.fetch_add(1, Ordering::Relaxed);
        hit
    }

    fn lookup_geometry(&self, key: &GeometryKey) -> Option<Arc<Vec<f64>>> {
        let hit = self.geometry.get(key).map(|s| self.touch(s));
        let counter = if hit.is_some() { &self.geometry_hits } else { &self.geometry_misses };
        counter.fetch_add(1, Ordering::Relaxed);
        hit
    }

    fn insert<K: Ord + Copy, T>(
        table: &mut BTreeMap<K, Slot<T>>,
        capacity: usize,
        clock: &AtomicUsize,
        evictions: &mut usize,
        key: K,
        value: Arc<T>,
    ) -> Arc<T> {
        if let Some(existing) = table.get(&key) {
            return existing.value.clone();
        }
        while table.len() >= capacity {
            let oldest = table
                .iter()
                .min_by_key(|(_, s)| s.last_used.load(Ordering::Relaxed))
                .map(|(k, _)| *k);
            match oldest {
                Some(k) => {
                    table.remove(&k);
                    *evictions += 1;
                }
                None => break,
            }
        }
        let now = clock.fetch_add(1, Ordering::Relaxed);
        table.insert(
            key,
            Slot {
                value: value.clone(),
                last_used: AtomicUsize::new(now),
            },
        );
        value
    }

    fn insert_field(&mut self, key: FieldKey, map: Arc<RfMap>) -> Arc<RfMap> {
        Self::insert(&mut self.fields, self.capacity, &self.clock, &mut self.evictions, key, map)
    }

    fn insert_geometry(&mut self, key: GeometryKey, g: Arc<Vec<f64>>) -> Arc<Vec<f64>> {
        Self::insert(&mut self.geometry, self.capacity, &self.clock, &mut self.evictions, key, g)
    }

    pub fn clear(&mut self) {
        self.fields.clear();
        self.geometry.clear();
    }
}

/// Read/write access to a [`FieldCache`] behind whatever lock the owner uses.
pub trait CacheAccess {
    fn read<R>(&self, f: impl FnOnce(&FieldCache) -> R) -> R;
    fn write<R>(&self, f: impl FnOnce(&mut FieldCache) -> R) -> R;
}

/// Serve a field through a cache. Computation happens outside any write
/// access, so concurrent misses on different transmitters do not serialize.
pub fn resolve_cached<C: CacheAccess>(
    cache: &C,
    tx: &Transmitter,
    rf: &RfSettings,
    grid: &Grid,
) -> Arc<RfMap> {
    let fkey = field_key(tx, rf, grid);
    if let Some(hit) = cache.read(|c| c.lookup_field(&fkey)) {
        return hit;
    }
    let gkey = fkey.0;
    let geometry = match cache.read(|c| c.lookup_geometry(&gkey)) {
        Some(g) => g,
        None => {
            let g = Arc::new(geometry_field(tx.pos, tx.height, rf, grid));
            cache.write(|c| c.insert_geometry(gkey, g))
        }
    };
    let map = Arc::new(field_from_geometry(tx, rf, &geometry, grid));
    cache.write(|c| c.insert_field(fkey, map))
}

/// Single-threaded cache for `no_std` users and tests.
#[derive(Debug)]
pub struct LocalFieldCache(RefCell<FieldCache>);

impl LocalFieldCache {
    pub fn new(capacity: usize) -> Self {
        Self(RefCell::new(FieldCache::new(capacity)))
    }

    pub fn stats(&self) -> CacheStats {
        self.0.borrow().stats()
    }
}

impl CacheAccess for LocalFieldCache {
    fn read<R>(&self, f: impl FnOnce(&FieldCache) -> R) -> R {
        f(&self.0.borrow())
    }

    fn write<R>(&self, f: impl FnOnce(&mut FieldCache) -> R) -> R {
        f(&mut self.0.borrow_mut())
    }
}

impl FieldProvider for LocalFieldCache {
    fn single_source(&self, tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> Arc<RfMap> {
        resolve_cached(self, tx, rf, grid)
    }
}
