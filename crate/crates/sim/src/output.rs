//! Result files: per-step and per-trial CSV, the comparison report and map rasters.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rdz_core::power::{dbm_to_mw, mw_to_dbm};
use rdz_core::{PolicyKind, RfMap, TrialSummary};

use crate::harness::{Experiment, TrialRecord};
use crate::scenario::Scenario;

/// Value written for cells that receive no power at all.
pub const NO_POWER_DBM: f64 = -999.0;

/// Shortest round-trip form; `-inf` sentinels are written as such.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn joined<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub const STEP_HEADER: [&str; 18] = [
    "trial", "policy", "step", "mobile_x", "mobile_y", "mobile_freq_mhz", "leakage_points", "leaked_power_dbm",
    "interference_dbm", "sinr_db", "active", "valid", "reward", "sensed", "planned", "executed", "skipped", "error",
];

pub fn write_steps<W: io::Write>(out: W, records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_HEADER)?;
    for r in records {
        for s in &r.steps {
            let m = &s.outcome.metrics;
            let d = &s.outcome.decision;
            let sensed: Vec<String> = s
                .outcome
                .sensed
                .iter()
                .map(|v| format!("{:?}:{}", v.kind, v.offender_id).to_lowercase())
                .collect();
            w.write_record([
                r.trial.to_string(),
                r.policy.to_string(),
                s.step.to_string(),
                num(s.mobile_pos.x),
                num(s.mobile_pos.y),
                num(s.mobile_frequency),
                m.leakage_points.to_string(),
                num(m.leaked_power_dbm),
                num(m.interference_dbm),
                opt(m.mobile_sinr_db),
                m.mobile_active.to_string(),
                m.step_valid.to_string(),
                num(m.reward),
                sensed.join(";"),
                joined(&d.planned),
                joined(&d.executed),
                joined(&d.skipped),
                d.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "trial", "policy", "leakage_points", "leaked_power_dbm", "interference_dbm", "sinr_mean_db", "sinr_std_db",
    "sinr_samples", "sinr_above_25db", "uptime", "total_reward",
];

pub fn write_summary<W: io::Write>(out: W, records: &[TrialRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in records {
        let s = &r.summary;
        w.write_record([
            r.trial.to_string(),
            r.policy.to_string(),
            s.total_leakage_points.to_string(),
            num(s.total_leaked_power_dbm),
            num(s.total_interference_dbm),
            opt(s.sinr_mean()),
            opt(s.sinr_std()),
            s.sinr_samples.len().to_string(),
            opt(s.sinr_fraction_above(25.0)),
            num(s.uptime),
            num(s.total_reward),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Totals of one policy across all its trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTotals {
    pub policy: PolicyKind,
    pub trials: usize,
    pub leakage_points: usize,
    pub leaked_power_dbm: f64,
    pub interference_dbm: f64,
    pub sinr: TrialSummary,
    pub mean_uptime: f64,
    pub mean_reward: f64,
}

pub fn policy_totals(exp: &Experiment, policy: PolicyKind) -> PolicyTotals {
    let recs: Vec<_> = exp.records_for(policy).collect();
    let n = recs.len().max(1) as f64;
    let lin = |f: fn(&TrialSummary) -> f64| mw_to_dbm(recs.iter().map(|r| dbm_to_mw(f(&r.summary))).sum());
    let pooled = TrialSummary {
        total_leakage_points: 0,
        total_leaked_power_dbm: f64::NEG_INFINITY,
        total_interference_dbm: f64::NEG_INFINITY,
        sinr_samples: recs.iter().flat_map(|r| r.summary.sinr_samples.iter().copied()).collect(),
        uptime: 1.0,
        total_reward: 0.0,
    };
    PolicyTotals {
        policy,
        trials: recs.len(),
        leakage_points: recs.iter().map(|r| r.summary.total_leakage_points).sum(),
        leaked_power_dbm: lin(|s| s.total_leaked_power_dbm),
        interference_dbm: lin(|s| s.total_interference_dbm),
        sinr: pooled,
        mean_uptime: recs.iter().map(|r| r.summary.uptime).sum::<f64>() / n,
        mean_reward: recs.iter().map(|r| r.summary.total_reward).sum::<f64>() / n,
    }
}

fn fixed(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.digits$}"),
        Some(v) if v < 0.0 => "-inf".into(),
        Some(_) => "inf".into(),
        None => "-".into(),
    }
}

/// Plain-text comparison of the policies.
pub fn render_report(scn: &Scenario, exp: &Experiment) -> String {
    let s = &exp.settings;
    let mut out = String::new();
    let name = if scn.name.is_empty() { "(unnamed)" } else { &scn.name };
    let _ = writeln!(out, "scenario   {name}");
    let _ = writeln!(out, "sha256     {}", scn.hash);
    let _ = writeln!(out, "seed {}  trials {}  steps {}", s.seed, s.trials, s.steps);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>12} {:>12} {:>10} {:>9} {:>9} {:>8} {:>11}",
        "policy", "leak_pts", "leak_dBm", "interf_dBm", "sinr_mean", "sinr_std", ">25dB", "uptime", "reward/trial"
    );
    for &p in &s.policies {
        let t = policy_totals(exp, p);
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>12} {:>12} {:>10} {:>9} {:>9} {:>8} {:>11}",
            p.to_string(),
            t.leakage_points,
            fixed(Some(t.leaked_power_dbm), 2),
            fixed(Some(t.interference_dbm), 2),
            fixed(t.sinr.sinr_mean(), 2),
            fixed(t.sinr.sinr_std(), 2),
            fixed(t.sinr.sinr_fraction_above(25.0), 3),
            fixed(Some(t.mean_uptime), 3),
            fixed(Some(t.mean_reward), 1),
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "per trial: leakage points / leaked power dBm / interference dBm / uptime");
    for trial in 0..s.trials {
        let _ = writeln!(out, "trial {trial}");
        for &p in &s.policies {
            if let Some(r) = exp.record(p, trial) {
                let m = &r.summary;
                let _ = writeln!(
                    out,
                    "  {:<10} {:>8} {:>10} {:>10} {:>6}",
                    p.to_string(),
                    m.total_leakage_points,
                    fixed(Some(m.total_leaked_power_dbm), 2),
                    fixed(Some(m.total_interference_dbm), 2),
                    fixed(Some(m.uptime), 3),
                );
            }
        }
    }
    out
}

/// Write `steps.csv`, `summary.csv` and `report.txt` into `dir`.
pub fn write_experiment(dir: &Path, scn: &Scenario, exp: &Experiment) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    write_steps(fs::File::create(dir.join("steps.csv"))?, &exp.records)?;
    write_summary(fs::File::create(dir.join("summary.csv"))?, &exp.records)?;
    fs::write(dir.join("report.txt"), render_report(scn, exp))?;
    Ok(())
}

/// Row-major dBm raster, one grid row per line.
pub fn write_map<W: io::Write>(out: W, map: &RfMap) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for y in 0..map.height() {
        let row: Vec<String> = (0..map.width())
            .map(|x| {
                let mw = map.mw(x, y);
                let dbm = if mw > 0.0 { mw_to_dbm(mw) } else { NO_POWER_DBM };
                format!("{dbm:.3}")
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
