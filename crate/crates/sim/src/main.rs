use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rdz_core::htn::render_trace;
use rdz_core::propagation::compute_map;
use rdz_core::twin::StateSnapshot;
use rdz_core::{plan_actions, plan_maintenance, MaintenanceGoal, PolicyKind, RdzState, ZoneBoundary};
use rdz_sim::harness::{run_experiment, ExperimentSettings};
use rdz_sim::output::{render_report, write_experiment, write_map};
use rdz_sim::{Scenario, SharedFieldCache};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "rdz", version, about = "Radio dynamic zone maintenance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every policy over every trial and write steps.csv, summary.csv and report.txt.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated list, e.g. htn,htn-0.1,random,naive. Defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Plan once for a saved state and print the decomposition tree and the actions.
    PlanTrace {
        #[arg(long)]
        scenario: PathBuf,
        /// JSON state snapshot, as written by `snapshot`.
        #[arg(long)]
        step_state: PathBuf,
    },
    /// Write the aggregate received-power map of the initial state as CSV (dBm).
    Map {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only transmitters on this frequency (MHz).
        #[arg(long)]
        frequency: Option<f64>,
    },
    /// Write the scenario's initial state as a JSON snapshot for `plan-trace`.
    Snapshot {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input of `plan-trace`: a state plus the pending incumbent request, if any.
#[derive(Serialize, Deserialize)]
struct PlanInput {
    #[serde(flatten)]
    state: StateSnapshot,
    #[serde(default)]
    incumbent_request: Option<ZoneBoundary>,
}

/// Print to stdout; a closed pipe (`rdz run ... | head`) is not an error.
fn say(text: String) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("invalid scenario {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            policies,
            out,
            seed,
            trials,
            steps,
        } => {
            let scn = load(&scenario)?;
            let mut settings = ExperimentSettings::from_scenario(&scn);
            if let Some(list) = policies {
                settings.policies = list
                    .iter()
                    .map(|p| p.trim().parse::<PolicyKind>())
                    .collect::<Result<_, _>>()?;
                if settings.policies.is_empty() {
                    bail!("--policies is empty");
                }
            }
            settings.seed = seed.unwrap_or(settings.seed);
            settings.trials = trials.unwrap_or(settings.trials);
            settings.steps = steps.unwrap_or(settings.steps);
            if settings.trials == 0 || settings.steps == 0 {
                bail!("--trials and --steps must be at least 1");
            }
            let cache = SharedFieldCache::new(scn.cache_capacity);
            let exp = run_experiment(&scn, settings, &cache)?;
            write_experiment(&out, &scn, &exp)?;
            say(format!("{}\nwrote {}", render_report(&scn, &exp), out.display()));
        }
        Command::PlanTrace { scenario, step_state } => {
            let scn = load(&scenario)?;
            let text = fs::read_to_string(&step_state).with_context(|| format!("reading {}", step_state.display()))?;
            let input: PlanInput = serde_json::from_str(&text).context("invalid state snapshot")?;
            let grid = scn.state.shared_grid();
            let goal = MaintenanceGoal {
                incumbent_request: match input.incumbent_request {
                    Some(z) => Some(ZoneBoundary::new(z.vertices().to_vec(), &grid)?),
                    None => None,
                },
            };
            let state = RdzState::from_snapshot(grid, input.state)?;
            let cache = SharedFieldCache::new(scn.cache_capacity);
            let plan = plan_maintenance(&state, &goal, &cache)?;
            let mut text = render_trace(&plan);
            text.push('\n');
            for (i, a) in plan_actions(&plan).iter().enumerate() {
                text.push_str(&format!("{:>2}. {a}\n", i + 1));
            }
            say(text);
        }
        Command::Map {
            scenario,
            out,
            frequency,
        } => {
            let scn = load(&scenario)?;
            let cache = SharedFieldCache::new(scn.cache_capacity);
            let start = Instant::now();
            let s = &scn.state;
            let map = compute_map(s.fleet(), frequency, s.rf(), s.grid(), &cache);
            let took = start.elapsed();
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_map(file, &map)?;
            say(format!(
                "{}x{} map of {} transmitters in {:.1} ms, wrote {}\n",
                map.width(),
                map.height(),
                s.fleet()
                    .iter()
                    .filter(|t| t.enabled && frequency.is_none_or(|f| t.frequency == f))
                    .count(),
                took.as_secs_f64() * 1e3,
                out.display()
            ));
        }
        Command::Snapshot { scenario, out } => {
            let scn = load(&scenario)?;
            let input = PlanInput {
                state: scn.state.snapshot(),
                incumbent_request: scn.requests.first().map(|r| r.zone.clone()),
            };
            fs::write(&out, serde_json::to_string_pretty(&input)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
