//! Random zone states for property tests.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rdz_core::propagation::{PropagationModel, RfSettings};
use rdz_core::{Grid, GridPos, RdzConfig, RdzState, Role, Transmitter, ZoneBoundary};

pub const SIZE: usize = 64;

pub fn random_grid<R: Rng>(rng: &mut R) -> Arc<Grid> {
    let mut elev = vec![0.0; SIZE * SIZE];
    for _ in 0..rng.random_range(0..6) {
        let (x, y) = (rng.random_range(0..SIZE), rng.random_range(0..SIZE));
        let (w, h) = (rng.random_range(2..10), rng.random_range(2..10));
        let z = rng.random_range(5.0..40.0);
        for yy in y..(y + h).min(SIZE) {
            for xx in x..(x + w).min(SIZE) {
                elev[yy * SIZE + xx] = z;
            }
        }
    }
    Arc::new(Grid::with_elevation(SIZE, SIZE, 10.0, elev).unwrap())
}

fn pos_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> GridPos {
    GridPos::new(rng.random_range(lo..hi), rng.random_range(lo..hi))
}

/// A zone state with endpoints inside the zone, a few stationary transmitters
/// anywhere and one mobile, with random powers, channels and enabled flags.
pub fn random_state<R: Rng>(rng: &mut R, grid: Arc<Grid>) -> RdzState {
    let lo = rng.random_range(4.0..20.0);
    let hi = rng.random_range(40.0..60.0);
    let zone = ZoneBoundary::rect(lo, lo, hi, hi, &grid).unwrap();
    let config = RdzConfig::default();
    let channels = config.channel_set.clone();
    let ch = |rng: &mut R| channels[rng.random_range(0..channels.len())];
    let mut fleet = Vec::new();
    for i in 0..rng.random_range(1..4) {
        let p = pos_in(rng, lo, hi);
        fleet.push(Transmitter::new(format!("e{i}"), Role::Endpoint, p, 1.8, 20.0, -2.0, ch(rng)));
    }
    for i in 0..rng.random_range(0..7) {
        let p = pos_in(rng, 0.0, (SIZE - 1) as f64);
        let mut t = Transmitter::new(
            format!("s{i}"),
            Role::StationaryTest,
            p,
            rng.random_range(5.0..40.0),
            rng.random_range(-40.0..30.0),
            4.9,
            ch(rng),
        );
        t.enabled = rng.random_bool(0.6);
        fleet.push(t);
    }
    let mut m = Transmitter::new(
        "mobile",
        Role::MobileTest,
        pos_in(rng, 0.0, (SIZE - 1) as f64),
        30.0,
        rng.random_range(-30.0..25.0),
        4.9,
        ch(rng),
    );
    m.enabled = rng.random_bool(0.7);
    fleet.push(m);
    let rf = RfSettings {
        model: PropagationModel::terrain_aware(3.0),
        ..RfSettings::default()
    };
    RdzState::new(grid, zone, config, rf, fleet).unwrap()
}
