//! The zone-maintenance planning domain.
//!
//! ```text
//! maintain_rdz
//!   handle_incumbent_request(zone)   only when a request is pending
//!     update_zone, mitigate_leakage, relocate_mobiles, restore_transmitters
//!   mitigate_leakage                 disable every leaking test transmitter
//!   mitigate_interference            per interfering mobile: retune, else disable
//!   restore_transmitters             re-enable what the twin shows as compliant
//!   conclude                         idle when nothing else was planned
//! ```
//!
//! Every applicability test that involves radio behaviour is evaluated on the
//! twin carried through the search, never on the live state.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::{GridPos, ZoneBoundary};
use crate::htn::{Domain, HtnError, Plan, Task, DEFAULT_DEPTH_LIMIT};
use crate::propagation::{same_channel, FieldProvider};
use crate::twin::{RdzState, TwinError};

/// The control primitives the manager can apply to the zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicAction {
    Idle,
    Disable(String),
    Enable(String),
    RoundRobinFreq(String),
    SetWaypoint(String, GridPos),
    UpdateZone(ZoneBoundary),
}

impl AtomicAction {
    /// Discrete action index shared with learned policies:
    /// 0 idle, 1 disable, 2 enable, 3 round-robin frequency.
    pub fn code(&self) -> Option<u8> {
        match self {
            AtomicAction::Idle => Some(0),
            AtomicAction::Disable(_) => Some(1),
            AtomicAction::Enable(_) => Some(2),
            AtomicAction::RoundRobinFreq(_) => Some(3),
            _ => None,
        }
    }

    pub fn from_code(code: u8, target: &str) -> Option<Self> {
        Some(match code {
            0 => AtomicAction::Idle,
            1 => AtomicAction::Disable(target.into()),
            2 => AtomicAction::Enable(target.into()),
            3 => AtomicAction::RoundRobinFreq(target.into()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AtomicAction::Idle => "idle",
            AtomicAction::Disable(_) => "disable",
            AtomicAction::Enable(_) => "enable",
            AtomicAction::RoundRobinFreq(_) => "round_robin_freq",
            AtomicAction::SetWaypoint(..) => "set_waypoint",
            AtomicAction::UpdateZone(_) => "update_zone",
        }
    }

    fn target(&self) -> Option<&str> {
        match self {
            AtomicAction::Disable(t)
            | AtomicAction::Enable(t)
            | AtomicAction::RoundRobinFreq(t)
            | AtomicAction::SetWaypoint(t, _) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for AtomicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicAction::Idle => f.write_str("idle"),
            AtomicAction::SetWaypoint(t, p) => write!(f, "set_waypoint({t}, {:.1}, {:.1})", p.x, p.y),
            AtomicAction::UpdateZone(z) => write!(f, "update_zone({} vertices)", z.vertices().len()),
            other => write!(f, "{}({})", other.name(), other.target().unwrap_or_default()),
        }
    }
}

/// Execute one primitive against a state.
pub fn apply_action(state: &mut RdzState, action: &AtomicAction) -> Result<(), TwinError> {
    match action {
        AtomicAction::Idle => {}
        AtomicAction::Disable(id) => state.transmitter_mut(id)?.enabled = false,
        AtomicAction::Enable(id) => state.transmitter_mut(id)?.enabled = true,
        AtomicAction::RoundRobinFreq(id) => {
            let channels = state.config().channel_set.clone();
            let tx = state.transmitter_mut(id)?;
            let next = channels
                .iter()
                .position(|c| same_channel(*c, tx.frequency))
                .map_or(0, |i| (i + 1) % channels.len());
            tx.frequency = channels[next];
        }
        AtomicAction::SetWaypoint(id, pos) => {
            if !state.grid().in_bounds(*pos) {
                return Err(TwinError::BadTransmitter {
                    id: id.clone(),
                    reason: format!("waypoint ({}, {}) outside the grid", pos.x, pos.y),
                });
            }
            state.transmitter_mut(id)?.waypoint = Some(*pos);
        }
        AtomicAction::UpdateZone(zone) => state.set_zone(zone.clone())?,
    }
    Ok(())
}

/// Argument values carried by domain tasks.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainArg {
    Tx(String),
    Pos(GridPos),
    Zone(ZoneBoundary),
}

impl fmt::Display for DomainArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainArg::Tx(id) => f.write_str(id),
            DomainArg::Pos(p) => write!(f, "{:.1}, {:.1}", p.x, p.y),
            DomainArg::Zone(z) => write!(f, "{} vertices", z.vertices().len()),
        }
    }
}

/// Planning state: a twin of the zone plus the field source used to evaluate it.
#[derive(Clone)]
pub struct Twin<'m> {
    pub state: RdzState,
    pub fields: &'m dyn FieldProvider,
    /// Non-idle primitives applied so far in this branch.
    pub applied: usize,
}

impl<'m> Twin<'m> {
    pub fn new(state: RdzState, fields: &'m dyn FieldProvider) -> Self {
        Self {
            state,
            fields,
            applied: 0,
        }
    }

    fn leaks(&self, id: &str) -> bool {
        matches!(self.state.detect_leakage(id, self.fields), Ok(Some(_)))
    }

    fn interferes(&self, id: &str) -> bool {
        matches!(self.state.detect_interference(id), Ok(Some(_)))
    }
}

/// Pending northbound input for the planner.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaintenanceGoal {
    pub incumbent_request: Option<ZoneBoundary>,
}

impl MaintenanceGoal {
    pub fn todo(&self) -> Vec<Task<DomainArg>> {
        let args = self
            .incumbent_request
            .iter()
            .cloned()
            .map(DomainArg::Zone)
            .collect();
        vec![Task::new("maintain_rdz", args)]
    }
}

/// Most retune steps a single interference resolution may chain.
const MAX_RETUNES: usize = 8;

fn tx_arg(args: &[DomainArg]) -> Option<&str> {
    match args.first() {
        Some(DomainArg::Tx(id)) => Some(id),
        _ => None,
    }
}

pub fn task_to_action(task: &Task<DomainArg>) -> Option<AtomicAction> {
    let tx = || tx_arg(&task.args).map(String::from);
    Some(match task.name.as_str() {
        "idle" => AtomicAction::Idle,
        "disable" => AtomicAction::Disable(tx()?),
        "enable" => AtomicAction::Enable(tx()?),
        "round_robin_freq" => AtomicAction::RoundRobinFreq(tx()?),
        "set_waypoint" => match task.args.get(1) {
            Some(DomainArg::Pos(p)) => AtomicAction::SetWaypoint(tx()?, *p),
            _ => return None,
        },
        "update_zone" => match task.args.first() {
            Some(DomainArg::Zone(z)) => AtomicAction::UpdateZone(z.clone()),
            _ => return None,
        },
        _ => return None,
    })
}

pub fn action_to_task(action: &AtomicAction) -> Task<DomainArg> {
    let tx = |id: &String| vec![DomainArg::Tx(id.clone())];
    match action {
        AtomicAction::Idle => Task::bare("idle"),
        AtomicAction::Disable(id) => Task::new("disable", tx(id)),
        AtomicAction::Enable(id) => Task::new("enable", tx(id)),
        AtomicAction::RoundRobinFreq(id) => Task::new("round_robin_freq", tx(id)),
        AtomicAction::SetWaypoint(id, p) => {
            Task::new("set_waypoint", vec![DomainArg::Tx(id.clone()), DomainArg::Pos(*p)])
        }
        AtomicAction::UpdateZone(z) => Task::new("update_zone", vec![DomainArg::Zone(z.clone())]),
    }
}

fn enabled_leakers(t: &Twin<'_>) -> Vec<String> {
    t.state
        .test_transmitters()
        .filter(|tx| tx.enabled && t.leaks(&tx.id))
        .map(|tx| tx.id.clone())
        .collect()
}

fn retuned(t: &Twin<'_>, id: &str, times: usize) -> Option<RdzState> {
    let mut s = t.state.clone();
    for _ in 0..times {
        apply_action(&mut s, &AtomicAction::RoundRobinFreq(id.into())).ok()?;
    }
    Some(s)
}

/// The maintenance domain over twins backed by any field provider.
pub fn build_domain<'m>() -> Domain<Twin<'m>, DomainArg> {
    let mut d: Domain<Twin<'m>, DomainArg> = Domain::new();

    macro_rules! primitive {
        ($name:literal) => {
            d.declare_primitive(
                $name,
                |t: &Twin<'m>, args: &[DomainArg]| {
                    task_to_action(&Task::new($name, args.to_vec()))
                        .is_some_and(|a| t.state.twin_apply(&a).is_ok())
                },
                |t: &mut Twin<'m>, args: &[DomainArg]| {
                    if let Some(a) = task_to_action(&Task::new($name, args.to_vec())) {
                        if apply_action(&mut t.state, &a).is_ok() && a != AtomicAction::Idle {
                            t.applied += 1;
                        }
                    }
                },
            )
            .expect("primitive names are unique")
        };
    }
    primitive!("idle");
    primitive!("disable");
    primitive!("enable");
    primitive!("round_robin_freq");
    primitive!("set_waypoint");
    primitive!("update_zone");

    let ok = |_: &Twin<'m>, _: &[DomainArg]| true;
    let expect = "compound tasks never clash with primitives";

    d.declare_method("maintain_rdz", "maintain", ok, |_, args| {
        let mut tasks = Vec::new();
        if let Some(DomainArg::Zone(z)) = args.first() {
            tasks.push(Task::new("handle_incumbent_request", vec![DomainArg::Zone(z.clone())]));
        }
        tasks.extend([
            Task::bare("mitigate_leakage"),
            Task::bare("mitigate_interference"),
            Task::bare("restore_transmitters"),
            Task::bare("conclude"),
        ]);
        tasks
    })
    .expect(expect);

    d.declare_method("handle_incumbent_request", "rezone", ok, |_, args| {
        vec![
            Task::new("update_zone", args.to_vec()),
            Task::bare("mitigate_leakage"),
            Task::bare("relocate_mobiles"),
            Task::bare("restore_transmitters"),
        ]
    })
    .expect(expect);

    d.declare_method("mitigate_leakage", "disable_leakers", ok, |t, _| {
        enabled_leakers(t)
            .into_iter()
            .map(|id| Task::new("disable", vec![DomainArg::Tx(id)]))
            .collect()
    })
    .expect(expect);

    d.declare_method("relocate_mobiles", "waypoints_into_zone", ok, |t, _| {
        let zone = t.state.zone();
        let grid = t.state.grid();
        let centroid = zone.centroid();
        let target = if zone.contains(centroid) {
            Some(centroid)
        } else {
            zone.nearest_inside(centroid, grid)
        };
        let Some(target) = target else {
            return Vec::new();
        };
        t.state
            .fleet()
            .iter()
            .filter(|tx| tx.is_mobile() && !zone.contains(tx.pos))
            .map(|tx| {
                Task::new(
                    "set_waypoint",
                    vec![DomainArg::Tx(tx.id.clone()), DomainArg::Pos(target)],
                )
            })
            .collect()
    })
    .expect(expect);

    d.declare_method("mitigate_interference", "resolve_each", ok, |t, _| {
        t.state
            .fleet()
            .iter()
            .filter(|tx| tx.is_mobile() && tx.enabled && t.interferes(&tx.id))
            .map(|tx| Task::new("resolve_interference", vec![DomainArg::Tx(tx.id.clone())]))
            .collect()
    })
    .expect(expect);

    // Retuning is preferred over disabling; each extra hop through the channel
    // list is a separate, later method.
    const RETUNE_METHODS: [&str; MAX_RETUNES] = [
        "retune_x1", "retune_x2", "retune_x3", "retune_x4", "retune_x5", "retune_x6", "retune_x7",
        "retune_x8",
    ];
    for (i, name) in RETUNE_METHODS.iter().enumerate() {
        let hops = i + 1;
        d.declare_method(
            "resolve_interference",
            name,
            move |t: &Twin<'m>, args: &[DomainArg]| {
                let Some(id) = tx_arg(args) else { return false };
                hops < t.state.config().channel_set.len()
                    && retuned(t, id, hops)
                        .is_some_and(|s| matches!(s.detect_interference(id), Ok(None)))
            },
            move |_, args| {
                (0..hops)
                    .map(|_| Task::new("round_robin_freq", args.to_vec()))
                    .collect()
            },
        )
        .expect(expect);
    }
    d.declare_method("resolve_interference", "disable", ok, |_, args| {
        vec![Task::new("disable", args.to_vec())]
    })
    .expect(expect);

    d.declare_method("restore_transmitters", "restore_each", ok, |t, _| {
        t.state
            .test_transmitters()
            .filter(|tx| !tx.enabled)
            .map(|tx| Task::new("restore", vec![DomainArg::Tx(tx.id.clone())]))
            .collect()
    })
    .expect(expect);

    d.declare_method(
        "restore",
        "enable_if_compliant",
        |t: &Twin<'m>, args: &[DomainArg]| {
            let Some(id) = tx_arg(args) else { return false };
            let Ok(twin) = t.state.twin_apply(&AtomicAction::Enable(id.into())) else {
                return false;
            };
            // A restored receiver can also push an enabled mobile over I_T.
            let probe = Twin::new(twin, t.fields);
            !probe.leaks(id)
                && !probe
                    .state
                    .fleet()
                    .iter()
                    .any(|m| m.is_mobile() && m.enabled && probe.interferes(&m.id))
        },
        |_, args| vec![Task::new("enable", args.to_vec())],
    )
    .expect(expect);
    d.declare_method("restore", "keep_disabled", ok, |_, _| Vec::new())
        .expect(expect);

    d.declare_method(
        "conclude",
        "idle_when_quiet",
        |t: &Twin<'m>, _: &[DomainArg]| t.applied == 0,
        |_, _| vec![Task::bare("idle")],
    )
    .expect(expect);
    d.declare_method("conclude", "done", ok, |_, _| Vec::new())
        .expect(expect);

    d
}

/// Plan one maintenance cycle for `state`.
pub fn plan_maintenance(
    state: &RdzState,
    goal: &MaintenanceGoal,
    fields: &dyn FieldProvider,
) -> Result<Plan<DomainArg>, HtnError> {
    let domain = build_domain();
    domain.find_plan(&Twin::new(state.clone(), fields), &goal.todo(), DEFAULT_DEPTH_LIMIT)
}

/// Atomic actions of a plan, in order.
pub fn plan_actions(plan: &Plan<DomainArg>) -> Vec<AtomicAction> {
    plan.actions.iter().filter_map(task_to_action).collect()
}
