//! A domain-independent hierarchical task network planner.
//!
//! Compound tasks are refined by methods tried in registration order; the
//! search is a depth-first walk over an agenda of pending tasks that
//! backtracks into the next method whenever a branch dead-ends. Planning
//! always works on clones of the caller's state.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Display, Write};

use thiserror::Error;

pub const DEFAULT_DEPTH_LIMIT: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HtnError {
    #[error("task `{0}` is neither a registered primitive nor a compound task")]
    Unregistered(String),
    #[error("`{0}` is already registered as a {1}")]
    NameClash(String, &'static str),
    #[error("search exceeded the depth limit of {0}")]
    DepthLimit(usize),
    #[error("no decomposition satisfies the task list")]
    NoPlan,
    #[error("action {index} (`{action}`) is not applicable during replay")]
    Inapplicable { index: usize, action: String },
}

/// A task instance: a registered name plus its arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Task<A> {
    pub name: String,
    pub args: Vec<A>,
}

impl<A> Task<A> {
    pub fn new(name: impl Into<String>, args: Vec<A>) -> Self {
        Self {
            name: name.into(),
            args,
        }
    }

    pub fn bare(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }
}

impl<A: Display> Display for Task<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

type Predicate<S, A> = Box<dyn Fn(&S, &[A]) -> bool + Send + Sync>;
type Decomposer<S, A> = Box<dyn Fn(&S, &[A]) -> Vec<Task<A>> + Send + Sync>;
type Effect<S, A> = Box<dyn Fn(&mut S, &[A]) + Send + Sync>;

pub struct Method<S, A> {
    pub name: String,
    applicable: Predicate<S, A>,
    decompose: Decomposer<S, A>,
}

pub struct PrimitiveAction<S, A> {
    pub name: String,
    applicable: Predicate<S, A>,
    apply: Effect<S, A>,
}

/// Registered primitives and methods.
pub struct Domain<S, A> {
    primitives: BTreeMap<String, PrimitiveAction<S, A>>,
    methods: BTreeMap<String, Vec<Method<S, A>>>,
}

impl<S, A> Default for Domain<S, A> {
    fn default() -> Self {
        Self {
            primitives: BTreeMap::new(),
            methods: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Task,
    Method,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub kind: NodeKind,
    pub label: String,
    pub parent: Option<usize>,
    /// Set when the node sits on a branch the search abandoned.
    pub rejected: bool,
}

/// Every node the search created, in creation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub nodes: Vec<TraceNode>,
}

impl Trace {
    pub fn rejected_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.rejected).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan<A> {
    pub actions: Vec<Task<A>>,
    pub trace: Trace,
}

impl<A> Plan<A> {
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }
}

struct Search<A> {
    plan: Vec<Task<A>>,
    trace: Vec<TraceNode>,
    depth_hit: bool,
    limit: usize,
}

impl<A> Search<A> {
    fn node(&mut self, kind: NodeKind, label: String, parent: Option<usize>) -> usize {
        self.trace.push(TraceNode {
            kind,
            label,
            parent,
            rejected: false,
        });
        self.trace.len() - 1
    }

    fn reject_from(&mut self, first: usize) {
        for n in &mut self.trace[first..] {
            n.rejected = true;
        }
    }
}

impl<S: Clone, A: Clone + Display> Domain<S, A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_primitive(
        &mut self,
        name: &str,
        applicable: impl Fn(&S, &[A]) -> bool + Send + Sync + 'static,
        apply: impl Fn(&mut S, &[A]) + Send + Sync + 'static,
    ) -> Result<(), HtnError> {
        if self.methods.contains_key(name) {
            return Err(HtnError::NameClash(name.to_string(), "compound task"));
        }
        if self.primitives.contains_key(name) {
            return Err(HtnError::NameClash(name.to_string(), "primitive"));
        }
        self.primitives.insert(
            name.to_string(),
            PrimitiveAction {
                name: name.to_string(),
                applicable: Box::new(applicable),
                apply: Box::new(apply),
            },
        );
        Ok(())
    }

    /// Add a method for `task`. Methods are tried in the order they are declared.
    pub fn declare_method(
        &mut self,
        task: &str,
        method: &str,
        applicable: impl Fn(&S, &[A]) -> bool + Send + Sync + 'static,
        decompose: impl Fn(&S, &[A]) -> Vec<Task<A>> + Send + Sync + 'static,
    ) -> Result<(), HtnError> {
        if self.primitives.contains_key(task) {
            return Err(HtnError::NameClash(task.to_string(), "primitive"));
        }
        self.methods.entry(task.to_string()).or_default().push(Method {
            name: method.to_string(),
            applicable: Box::new(applicable),
            decompose: Box::new(decompose),
        });
        Ok(())
    }

    pub fn is_primitive(&self, name: &str) -> bool {
        self.primitives.contains_key(name)
    }

    pub fn is_compound(&self, name: &str) -> bool {
        self.methods.contains_key(name)
    }

    pub fn methods_of(&self, task: &str) -> impl Iterator<Item = &str> {
        self.methods
            .get(task)
            .into_iter()
            .flatten()
            .map(|m| m.name.as_str())
    }

    /// First plan, in method order, that accomplishes `todo` from `state`.
    ///
    /// Branches deeper than `depth_limit` are cut; if the search then finds
    /// nothing the error is [`HtnError::DepthLimit`] rather than
    /// [`HtnError::NoPlan`].
    pub fn find_plan(
        &self,
        state: &S,
        todo: &[Task<A>],
        depth_limit: usize,
    ) -> Result<Plan<A>, HtnError> {
        let mut search = Search {
            plan: Vec::new(),
            trace: Vec::new(),
            depth_hit: false,
            limit: depth_limit,
        };
        // Agenda is a stack: the next task to refine sits at the end.
        let mut agenda: Vec<(Task<A>, Option<usize>)> =
            todo.iter().rev().cloned().map(|t| (t, None)).collect();
        match self.seek(state, &mut agenda, 0, &mut search)? {
            true => Ok(Plan {
                actions: search.plan,
                trace: Trace {
                    nodes: search.trace,
                },
            }),
            false if search.depth_hit => Err(HtnError::DepthLimit(depth_limit)),
            false => Err(HtnError::NoPlan),
        }
    }

    fn seek(
        &self,
        state: &S,
        agenda: &mut Vec<(Task<A>, Option<usize>)>,
        depth: usize,
        search: &mut Search<A>,
    ) -> Result<bool, HtnError> {
        let Some((task, parent)) = agenda.pop() else {
            return Ok(true);
        };
        if depth >= search.limit {
            search.depth_hit = true;
            agenda.push((task, parent));
            return Ok(false);
        }

        if let Some(prim) = self.primitives.get(&task.name) {
            let first = search.trace.len();
            let node = search.node(NodeKind::Task, task.to_string(), parent);
            if (prim.applicable)(state, &task.args) {
                search.node(NodeKind::Action, task.to_string(), Some(node));
                let mut next = state.clone();
                (prim.apply)(&mut next, &task.args);
                search.plan.push(task.clone());
                if self.seek(&next, agenda, depth + 1, search)? {
                    return Ok(true);
                }
                search.plan.pop();
            }
            search.reject_from(first);
            agenda.push((task, parent));
            return Ok(false);
        }

        let Some(methods) = self.methods.get(&task.name) else {
            return Err(HtnError::Unregistered(task.name.clone()));
        };
        let first = search.trace.len();
        let node = search.node(NodeKind::Task, task.to_string(), parent);
        for method in methods {
            if !(method.applicable)(state, &task.args) {
                continue;
            }
            let attempt = search.trace.len();
            let mnode = search.node(NodeKind::Method, method.name.clone(), Some(node));
            let subtasks = (method.decompose)(state, &task.args);
            let mark = agenda.len();
            agenda.extend(subtasks.into_iter().rev().map(|t| (t, Some(mnode))));
            if self.seek(state, agenda, depth + 1, search)? {
                return Ok(true);
            }
            agenda.truncate(mark);
            search.reject_from(attempt);
        }
        search.reject_from(first);
        agenda.push((task, parent));
        Ok(false)
    }

    /// Re-run a plan's actions from `state`, checking applicability at each step.
    pub fn replay(&self, plan: &Plan<A>, state: &S) -> Result<S, HtnError> {
        self.replay_actions(&plan.actions, state)
    }

    pub fn replay_actions(&self, actions: &[Task<A>], state: &S) -> Result<S, HtnError> {
        let mut s = state.clone();
        for (index, a) in actions.iter().enumerate() {
            let prim = self
                .primitives
                .get(&a.name)
                .ok_or_else(|| HtnError::Unregistered(a.name.clone()))?;
            if !(prim.applicable)(&s, &a.args) {
                return Err(HtnError::Inapplicable {
                    index,
                    action: a.to_string(),
                });
            }
            (prim.apply)(&mut s, &a.args);
        }
        Ok(s)
    }

    /// Applicability of a single grounded primitive.
    pub fn primitive_applicable(&self, state: &S, action: &Task<A>) -> Result<bool, HtnError> {
        let prim = self
            .primitives
            .get(&action.name)
            .ok_or_else(|| HtnError::Unregistered(action.name.clone()))?;
        Ok((prim.applicable)(state, &action.args))
    }
}

/// Indented decomposition tree. Abandoned branches are marked `[rejected]`.
pub fn render_trace<A>(plan: &Plan<A>) -> String {
    render_nodes(&plan.trace.nodes)
}

pub fn render_nodes(nodes: &[TraceNode]) -> String {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut roots = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        match n.parent {
            Some(p) => children[p].push(i),
            None => roots.push(i),
        }
    }
    let mut out = String::new();
    let mut stack: Vec<(usize, usize)> = roots.iter().rev().map(|&r| (r, 0)).collect();
    while let Some((i, depth)) = stack.pop() {
        let n = &nodes[i];
        for _ in 0..depth {
            out.push_str("  ");
        }
        let line = match n.kind {
            NodeKind::Task => n.label.clone(),
            NodeKind::Method => format!("method {}", n.label),
            NodeKind::Action => format!("-> {}", n.label),
        };
        out.push_str(&line);
        if n.rejected {
            out.push_str(" [rejected]");
        }
        out.push('\n');
        for &c in children[i].iter().rev() {
            stack.push((c, depth + 1));
        }
    }
    let _ = out.write_str("");
    out
}
