//! Random toy HTN domains small enough to enumerate every decomposition.
//!
//! State is a handful of bounded registers. Primitives nudge one register and
//! are blocked at the bounds; compound task `k` may only expand into
//! primitives and compound tasks with a larger index, so every decomposition
//! tree is finite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdz_core::htn::{Domain, Task};

pub const REGS: usize = 3;
pub const MAX: u8 = 3;

pub type State = [u8; REGS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prim {
    Inc(usize),
    Dec(usize),
}

impl Prim {
    pub fn name(self) -> String {
        match self {
            Prim::Inc(r) => format!("inc{r}"),
            Prim::Dec(r) => format!("dec{r}"),
        }
    }

    pub fn applicable(self, s: &State) -> bool {
        match self {
            Prim::Inc(r) => s[r] < MAX,
            Prim::Dec(r) => s[r] > 0,
        }
    }

    pub fn apply(self, s: &mut State) {
        match self {
            Prim::Inc(r) => s[r] += 1,
            Prim::Dec(r) => s[r] -= 1,
        }
    }

    fn all() -> Vec<Prim> {
        (0..REGS).flat_map(|r| [Prim::Inc(r), Prim::Dec(r)]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sub {
    Prim(Prim),
    Compound(usize),
}

#[derive(Debug, Clone)]
pub struct ToyMethod {
    /// Applicable when `register == value`, or always when `None`.
    pub guard: Option<(usize, u8)>,
    pub subtasks: Vec<Sub>,
}

#[derive(Debug, Clone)]
pub struct ToySpec {
    pub methods: Vec<Vec<ToyMethod>>,
    pub start: State,
    pub todo: Vec<Sub>,
}

fn guard_ok(g: Option<(usize, u8)>, s: &State) -> bool {
    g.is_none_or(|(r, v)| s[r] == v)
}

pub fn compound_name(k: usize) -> String {
    format!("t{k}")
}

impl ToySpec {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tasks = rng.random_range(1..=4usize);
        let prims = Prim::all();
        let mut methods = Vec::new();
        for k in 0..tasks {
            let n = rng.random_range(1..=3usize);
            let ms = (0..n)
                .map(|_| {
                    let guard = rng
                        .random_bool(0.5)
                        .then(|| (rng.random_range(0..REGS), rng.random_range(0..=MAX)));
                    let len = rng.random_range(0..=3usize);
                    let subtasks = (0..len)
                        .map(|_| {
                            if k + 1 < tasks && rng.random_bool(0.4) {
                                Sub::Compound(rng.random_range(k + 1..tasks))
                            } else {
                                Sub::Prim(prims[rng.random_range(0..prims.len())])
                            }
                        })
                        .collect();
                    ToyMethod { guard, subtasks }
                })
                .collect();
            methods.push(ms);
        }
        let start = [0; REGS].map(|_| rng.random_range(0..=MAX));
        let todo = (0..rng.random_range(1..=3usize))
            .map(|_| {
                if rng.random_bool(0.7) {
                    Sub::Compound(rng.random_range(0..tasks))
                } else {
                    Sub::Prim(prims[rng.random_range(0..prims.len())])
                }
            })
            .collect();
        ToySpec {
            methods,
            start,
            todo,
        }
    }

    pub fn domain(&self) -> Domain<State, u8> {
        let mut d = Domain::new();
        for p in Prim::all() {
            d.declare_primitive(&p.name(), move |s: &State, _: &[u8]| p.applicable(s), move |s: &mut State, _: &[u8]| p.apply(s))
                .unwrap();
        }
        for (k, ms) in self.methods.iter().enumerate() {
            for (i, m) in ms.iter().enumerate() {
                let guard = m.guard;
                let subs: Vec<Task<u8>> = m.subtasks.iter().map(task_of).collect();
                d.declare_method(
                    &compound_name(k),
                    &format!("m{i}"),
                    move |s: &State, _: &[u8]| guard_ok(guard, s),
                    move |_: &State, _: &[u8]| subs.clone(),
                )
                .unwrap();
            }
        }
        d
    }

    pub fn todo_tasks(&self) -> Vec<Task<u8>> {
        self.todo.iter().map(task_of).collect()
    }

    /// First complete decomposition in method order, by exhaustive search.
    pub fn enumerate_first(&self) -> Option<Vec<String>> {
        let mut plan = Vec::new();
        self.seek(self.start, self.todo.clone(), &mut plan).then_some(plan)
    }

    fn seek(&self, s: State, mut agenda: Vec<Sub>, plan: &mut Vec<String>) -> bool {
        if agenda.is_empty() {
            return true;
        }
        match agenda.remove(0) {
            Sub::Prim(p) => {
                if !p.applicable(&s) {
                    return false;
                }
                let mut next = s;
                p.apply(&mut next);
                plan.push(p.name());
                if self.seek(next, agenda, plan) {
                    return true;
                }
                plan.pop();
                false
            }
            Sub::Compound(k) => {
                for m in &self.methods[k] {
                    if !guard_ok(m.guard, &s) {
                        continue;
                    }
                    let mut expanded = m.subtasks.clone();
                    expanded.extend(agenda.iter().cloned());
                    let mark = plan.len();
                    if self.seek(s, expanded, plan) {
                        return true;
                    }
                    plan.truncate(mark);
                }
                false
            }
        }
    }
}

fn task_of(s: &Sub) -> Task<u8> {
    match s {
        Sub::Prim(p) => Task::bare(p.name()),
        Sub::Compound(k) => Task::bare(compound_name(*k)),
    }
}
