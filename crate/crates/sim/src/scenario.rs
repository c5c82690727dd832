//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "example"
//!
//! [grid]
//! width = 400
//! height = 400
//! cell_size = 10.0
//! elevation_csv = "terrain.csv"        # optional, relative to the scenario file
//! buildings = [                        # optional, applied on top of the CSV
//!   { x0 = 10, y0 = 10, x1 = 19, y1 = 14, height = 30.0 },
//! ]
//!
//! [zone]
//! rect = [50.0, 50.0, 350.0, 350.0]    # or: vertices = [[x, y], ...]
//!
//! [config]                             # thresholds, channels, noise floor, move distance
//! [rf]                                 # propagation model and map probe
//!
//! [[fleet]]
//! id = "m0"
//! role = "mobile_test"                 # endpoint | stationary_test | mobile_test
//! pos = [200.0, 200.0]
//! start_region = [180.0, 180.0, 220.0, 220.0]   # optional, mobiles only
//! height = 30.0
//! tx_power = 20.0
//! gain = 4.9
//! frequency = 3600.0
//!
//! [policy]
//! policies = ["htn", "naive"]
//! measure_before_act = false
//! reward = { clip_bound = 10.0, normalize_reward_signs = false }
//! incumbent_requests = [ { step = 10, rect = [100.0, 100.0, 300.0, 300.0] } ]
//!
//! [experiment]
//! steps = 50
//! trials = 5
//! seed = 1
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rdz_core::geo::GeoError;
use rdz_core::metrics::RewardConfig;
use rdz_core::policy::PolicyError;
use rdz_core::twin::TwinError;
use rdz_core::{Grid, GridPos, PolicyKind, RdzConfig, RdzState, RfSettings, Role, Transmitter, ZoneBoundary};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing scenario")]
    Parse(#[from] toml::de::Error),
    #[error("elevation CSV {path}: {reason}")]
    Elevation { path: PathBuf, reason: String },
    #[error("building {index}: {reason}")]
    Building { index: usize, reason: String },
    #[error("invalid zone")]
    Zone(#[from] GeoError),
    #[error("zone needs exactly one of `rect` or `vertices`")]
    ZoneShape,
    #[error(transparent)]
    Fleet(#[from] TwinError),
    #[error("transmitter `{0}`: start_region is only meaningful for mobiles")]
    StartRegion(String),
    #[error("transmitter `{id}`: start_region {region:?} is not an in-grid rectangle")]
    BadStartRegion { id: String, region: [f64; 4] },
    #[error("mobile `{0}` has no enabled endpoint to receive it")]
    NoEndpoint(String),
    #[error("exactly one mobile test transmitter is supported, found {0}")]
    MobileCount(usize),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("at least one policy is required")]
    NoPolicies,
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("reward clip bound must be positive, got {0}")]
    ClipBound(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Building {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
    height: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    #[serde(default = "default_size")]
    width: usize,
    #[serde(default = "default_size")]
    height: usize,
    #[serde(default = "default_cell")]
    cell_size: f64,
    elevation_csv: Option<PathBuf>,
    #[serde(default)]
    buildings: Vec<Building>,
}

fn default_size() -> usize {
    400
}

fn default_cell() -> f64 {
    10.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            width: default_size(),
            height: default_size(),
            cell_size: default_cell(),
            elevation_csv: None,
            buildings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneSpec {
    rect: Option<[f64; 4]>,
    vertices: Option<Vec<[f64; 2]>>,
}

impl ZoneSpec {
    fn build(&self, grid: &Grid) -> Result<ZoneBoundary, ScenarioError> {
        match (&self.rect, &self.vertices) {
            (Some([x0, y0, x1, y1]), None) => Ok(ZoneBoundary::rect(*x0, *y0, *x1, *y1, grid)?),
            (None, Some(v)) => Ok(ZoneBoundary::new(
                v.iter().map(|[x, y]| GridPos::new(*x, *y)).collect(),
                grid,
            )?),
            _ => Err(ScenarioError::ZoneShape),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FleetSpec {
    id: String,
    role: Role,
    pos: [f64; 2],
    height: f64,
    #[serde(default = "default_power")]
    tx_power: f64,
    #[serde(default)]
    gain: f64,
    frequency: f64,
    #[serde(default = "yes")]
    enabled: bool,
    start_region: Option<[f64; 4]>,
}

fn default_power() -> f64 {
    30.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestSpec {
    step: u64,
    #[serde(flatten)]
    zone: ZoneSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicySpec {
    #[serde(default = "default_policies")]
    policies: Vec<String>,
    #[serde(default)]
    measure_before_act: bool,
    #[serde(default)]
    reward: RewardConfig,
    #[serde(default)]
    incumbent_requests: Vec<RequestSpec>,
}

fn default_policies() -> Vec<String> {
    ["htn", "htn-0.1", "htn-0.2", "htn-0.3", "random", "naive"]
        .map(String::from)
        .to_vec()
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self {
            policies: default_policies(),
            measure_before_act: false,
            reward: RewardConfig::default(),
            incumbent_requests: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSpec {
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_cache")]
    cache_capacity: usize,
}

fn default_steps() -> usize {
    50
}
fn default_trials() -> usize {
    5
}
fn default_seed() -> u64 {
    1
}
fn default_cache() -> usize {
    96
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            trials: default_trials(),
            seed: default_seed(),
            cache_capacity: default_cache(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    grid: GridSpec,
    zone: ZoneSpec,
    #[serde(default)]
    config: RdzConfig,
    #[serde(default)]
    rf: RfSettings,
    fleet: Vec<FleetSpec>,
    #[serde(default)]
    policy: PolicySpec,
    #[serde(default)]
    experiment: ExperimentSpec,
}

/// A zone change requested by the incumbent, delivered to the policies at `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncumbentRequest {
    pub step: u64,
    pub zone: ZoneBoundary,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// Hex SHA-256 of the scenario text.
    pub hash: String,
    /// Initial state with every mobile at its nominal `pos`.
    pub state: RdzState,
    /// Random-start rectangles `[x0, y0, x1, y1]` keyed by mobile id.
    pub start_regions: Vec<(String, [f64; 4])>,
    pub policies: Vec<PolicyKind>,
    pub measure_before_act: bool,
    pub reward: RewardConfig,
    pub requests: Vec<IncumbentRequest>,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub cache_capacity: usize,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent())
    }

    /// Parse scenario text; relative file references resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        let grid = Arc::new(build_grid(&file.grid, base)?);
        let zone = file.zone.build(&grid)?;

        let mut fleet = Vec::with_capacity(file.fleet.len());
        let mut start_regions = Vec::new();
        for f in &file.fleet {
            let mut tx = Transmitter::new(
                f.id.clone(),
                f.role,
                GridPos::new(f.pos[0], f.pos[1]),
                f.height,
                f.tx_power,
                f.gain,
                f.frequency,
            );
            tx.enabled = f.enabled;
            if let Some(r) = f.start_region {
                if f.role != Role::MobileTest {
                    return Err(ScenarioError::StartRegion(f.id.clone()));
                }
                let ok = r[0] <= r[2]
                    && r[1] <= r[3]
                    && grid.in_bounds(GridPos::new(r[0], r[1]))
                    && grid.in_bounds(GridPos::new(r[2], r[3]));
                if !ok {
                    return Err(ScenarioError::BadStartRegion {
                        id: f.id.clone(),
                        region: r,
                    });
                }
                start_regions.push((f.id.clone(), r));
            }
            fleet.push(tx);
        }
        let state = RdzState::new(grid.clone(), zone, file.config, file.rf, fleet)?;

        let mobiles: Vec<_> = state.fleet().iter().filter(|t| t.is_mobile()).collect();
        if mobiles.len() != 1 {
            return Err(ScenarioError::MobileCount(mobiles.len()));
        }
        if !state.fleet().iter().any(|t| t.role == Role::Endpoint && t.enabled) {
            return Err(ScenarioError::NoEndpoint(mobiles[0].id.clone()));
        }

        let policies = file
            .policy
            .policies
            .iter()
            .map(|p| p.parse::<PolicyKind>())
            .collect::<Result<Vec<_>, _>>()?;
        if policies.is_empty() {
            return Err(ScenarioError::NoPolicies);
        }
        if !(file.policy.reward.clip_bound > 0.0) {
            return Err(ScenarioError::ClipBound(file.policy.reward.clip_bound));
        }
        let mut requests = file
            .policy
            .incumbent_requests
            .iter()
            .map(|r| {
                Ok(IncumbentRequest {
                    step: r.step,
                    zone: r.zone.build(&grid)?,
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        requests.sort_by_key(|r| r.step);

        let e = &file.experiment;
        for (v, what) in [
            (e.steps, "experiment.steps"),
            (e.trials, "experiment.trials"),
            (e.cache_capacity, "experiment.cache_capacity"),
        ] {
            if v == 0 {
                return Err(ScenarioError::Zero(what));
            }
        }

        let digest = Sha256::digest(text.as_bytes());
        let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Scenario {
            name: file.name,
            hash,
            state,
            start_regions,
            policies,
            measure_before_act: file.policy.measure_before_act,
            reward: file.policy.reward,
            requests,
            steps: e.steps,
            trials: e.trials,
            seed: e.seed,
            cache_capacity: e.cache_capacity,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.state.grid()
    }
}

fn build_grid(spec: &GridSpec, base: Option<&Path>) -> Result<Grid, ScenarioError> {
    let (w, h) = (spec.width, spec.height);
    let mut elevation = match &spec.elevation_csv {
        Some(rel) => {
            let path = base.map_or_else(|| rel.clone(), |b| b.join(rel));
            read_elevation(&path, w, h)?
        }
        None => vec![0.0; w * h],
    };
    for (index, b) in spec.buildings.iter().enumerate() {
        if b.x0 > b.x1 || b.y0 > b.y1 || b.x1 >= w || b.y1 >= h {
            return Err(ScenarioError::Building {
                index,
                reason: format!("cells ({}, {})-({}, {}) outside a {w}x{h} grid", b.x0, b.y0, b.x1, b.y1),
            });
        }
        if !(b.height >= 0.0) || !b.height.is_finite() {
            return Err(ScenarioError::Building {
                index,
                reason: format!("height {} must be a non-negative number", b.height),
            });
        }
        for y in b.y0..=b.y1 {
            for cell in &mut elevation[y * w + b.x0..=y * w + b.x1] {
                *cell = cell.max(b.height);
            }
        }
    }
    Ok(Grid::with_elevation(w, h, spec.cell_size, elevation)?)
}

/// Row-major elevation raster: `height` rows of `width` comma-separated meters.
pub fn read_elevation(path: &Path, width: usize, height: usize) -> Result<Vec<f64>, ScenarioError> {
    let err = |reason: String| ScenarioError::Elevation {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut out = Vec::with_capacity(width * height);
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != width {
            return Err(err(format!("row {rows} has {} columns, expected {width}", record.len())));
        }
        for field in record.iter() {
            out.push(field.parse::<f64>().map_err(|e| err(format!("row {rows}: {e}")))?);
        }
        rows += 1;
    }
    if rows != height {
        return Err(err(format!("{rows} rows, expected {height}")));
    }
    Ok(out)
}
