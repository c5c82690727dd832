mod common;

use std::io::Write;

use common::{bundled, small, SMALL};
use rdz_core::{GridPos, PolicyKind, Role};
use rdz_sim::{Scenario, ScenarioError};

#[test]
fn bundled_scenarios_load() {
    let leak = Scenario::load(&bundled("leakage.scenario")).unwrap();
    let fixed: Vec<_> = leak.state.fleet().iter().filter(|t| t.role == Role::StationaryTest).collect();
    assert_eq!(fixed.len(), 9);
    assert!(fixed.iter().all(|t| t.frequency == 3600.0));
    assert_eq!(leak.state.mobile().unwrap().frequency, 3600.0);
    assert_eq!((leak.steps, leak.trials), (50, 5));
    assert_eq!(leak.policies.len(), 6);
    assert_eq!(leak.requests.len(), 1);

    let inter = Scenario::load(&bundled("interference.scenario")).unwrap();
    let fixed = inter.state.fleet().iter().filter(|t| t.role == Role::StationaryTest).count();
    assert_eq!(fixed, 18);
    assert_eq!(inter.state.fleet().len(), 28);
    assert_eq!(inter.grid().width(), 400);
}

#[test]
fn defaults_and_hash() {
    let s = small();
    assert_eq!(s.hash.len(), 64);
    assert_eq!(s.hash, small().hash);
    assert_ne!(s.hash, Scenario::parse(&SMALL.replace("small", "other"), None).unwrap().hash);
    assert_eq!(s.policies[0], PolicyKind::Htn);
    assert_eq!(s.policies[1], PolicyKind::stochastic(0.1).unwrap());
    let edge = s.state.transmitter("edge").unwrap();
    assert_eq!(edge.gain, 0.0);
    assert!(edge.enabled);
    // Buildings raise the covered cells, inclusive of both corners.
    assert_eq!(s.grid().elevation_at(GridPos::new(20.0, 40.0)), 25.0);
    assert_eq!(s.grid().elevation_at(GridPos::new(26.0, 43.0)), 25.0);
    assert_eq!(s.grid().elevation_at(GridPos::new(27.0, 43.0)), 0.0);
}

#[track_caller]
fn parse_err(text: &str) -> ScenarioError {
    match Scenario::parse(text, None) {
        Ok(_) => panic!("scenario accepted"),
        Err(e) => e,
    }
}

#[test]
fn invalid_scenarios_are_rejected() {
    let two_mobiles = SMALL.replacen("id = \"edge\"\nrole = \"stationary_test\"", "id = \"edge\"\nrole = \"mobile_test\"", 1);
    assert!(matches!(parse_err(&two_mobiles), ScenarioError::MobileCount(2)));

    let no_endpoint = SMALL.replace("role = \"endpoint\"", "role = \"stationary_test\"");
    assert!(matches!(parse_err(&no_endpoint), ScenarioError::NoEndpoint(_)));

    let zone_out = SMALL.replace("rect = [6.0, 6.0, 57.0, 57.0]", "rect = [6.0, 6.0, 70.0, 57.0]");
    assert!(matches!(parse_err(&zone_out), ScenarioError::Zone(_)));

    let both = SMALL.replace("rect = [6.0, 6.0, 57.0, 57.0]", "rect = [6.0, 6.0, 57.0, 57.0]\nvertices = [[1.0, 1.0]]");
    assert!(matches!(parse_err(&both), ScenarioError::ZoneShape));

    let off_channel = SMALL.replace("frequency = 3620.0", "frequency = 5000.0");
    assert!(matches!(parse_err(&off_channel), ScenarioError::Fleet(_)));

    let region = SMALL.replace("pos = [10.0, 32.0]", "pos = [10.0, 32.0]\nstart_region = [0.0, 0.0, 1.0, 1.0]");
    assert!(matches!(parse_err(&region), ScenarioError::StartRegion(_)));

    let region = SMALL.replace("start_region = [28.0, 28.0, 36.0, 36.0]", "start_region = [28.0, 28.0, 90.0, 36.0]");
    assert!(matches!(parse_err(&region), ScenarioError::BadStartRegion { .. }));

    let building = SMALL.replace("x1 = 26", "x1 = 64");
    assert!(matches!(parse_err(&building), ScenarioError::Building { index: 0, .. }));

    let policy = SMALL.replace("[policy]", "[policy]\npolicies = [\"htn\", \"htn-1.5\"]");
    assert!(matches!(parse_err(&policy), ScenarioError::Policy(_)));

    let empty = SMALL.replace("[policy]", "[policy]\npolicies = []");
    assert!(matches!(parse_err(&empty), ScenarioError::NoPolicies));

    let zero = SMALL.replace("trials = 3", "trials = 0");
    assert!(matches!(parse_err(&zero), ScenarioError::Zero("experiment.trials")));

    let clip = SMALL.replace("[policy]", "[policy]\nreward = { clip_bound = 0.0 }");
    assert!(matches!(parse_err(&clip), ScenarioError::ClipBound(_)));

    let typo = SMALL.replace("move_distance", "move_distanc");
    assert!(matches!(parse_err(&typo), ScenarioError::Parse(_)));

    let request = SMALL.replace("step = 4, rect = [10.0, 10.0, 54.0, 54.0]", "step = 4, rect = [10.0, 10.0, 80.0, 54.0]");
    assert!(matches!(parse_err(&request), ScenarioError::Zone(_)));
}

#[test]
fn elevation_csv_is_read_relative_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = std::fs::File::create(dir.path().join("terrain.csv")).unwrap();
    for y in 0..64 {
        let row: Vec<String> = (0..64).map(|x| if x == 5 && y == 7 { "12.5".into() } else { "0".into() }).collect();
        writeln!(csv, "{}", row.join(",")).unwrap();
    }
    drop(csv);
    let text = SMALL.replace("cell_size = 10.0", "cell_size = 10.0\nelevation_csv = \"terrain.csv\"");
    let path = dir.path().join("t.scenario");
    std::fs::write(&path, text).unwrap();
    let s = Scenario::load(&path).unwrap();
    assert_eq!(s.grid().elevation_at(GridPos::new(5.0, 7.0)), 12.5);
    assert_eq!(s.grid().elevation_at(GridPos::new(7.0, 5.0)), 0.0);

    std::fs::write(dir.path().join("terrain.csv"), "1,2,3\n").unwrap();
    assert!(matches!(Scenario::load(&path), Err(ScenarioError::Elevation { .. })));
    assert!(matches!(
        Scenario::load(&dir.path().join("missing.scenario")),
        Err(ScenarioError::Io { .. })
    ));
}
