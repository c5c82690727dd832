//! A small scenario that exercises every code path in a fraction of a second.

#![allow(dead_code)]

use rdz_sim::Scenario;

pub const SMALL: &str = r#"
name = "small"

[grid]
width = 64
height = 64
cell_size = 10.0
buildings = [ { x0 = 20, y0 = 40, x1 = 26, y1 = 43, height = 25.0 } ]

[zone]
rect = [6.0, 6.0, 57.0, 57.0]

[config]
interference_threshold = -75.0
endpoints_as_victims = false
move_distance = 3.0

[rf]
model = { kind = "terrain-aware", path_loss_exponent = 3.0 }

[[fleet]]
id = "mobile"
role = "mobile_test"
pos = [32.0, 32.0]
start_region = [28.0, 28.0, 36.0, 36.0]
height = 1.5
tx_power = 0.0
frequency = 3600.0

[[fleet]]
id = "edge"
role = "stationary_test"
pos = [10.0, 32.0]
height = 10.0
tx_power = 20.0
frequency = 3600.0

[[fleet]]
id = "sensor"
role = "stationary_test"
pos = [34.0, 32.0]
height = 2.0
tx_power = -30.0
frequency = 3600.0

[[fleet]]
id = "ep"
role = "endpoint"
pos = [32.0, 30.0]
height = 20.0
gain = 10.0
frequency = 3620.0

[policy]
incumbent_requests = [ { step = 4, rect = [10.0, 10.0, 54.0, 54.0] } ]

[experiment]
steps = 12
trials = 3
seed = 5
cache_capacity = 64
"#;

pub fn small() -> Scenario {
    Scenario::parse(SMALL, None).unwrap()
}

pub fn bundled(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}
