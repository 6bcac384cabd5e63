//! Truck assignment, sequencing and start-time selection for one
//! subproblem.
//!
//! Every solver here minimizes the same objective: the sum over
//! consecutive task pairs on a truck of the travel cost from the first
//! task's destination to the second task's origin. Tasks occupy a single
//! interval of `travel_time + 2 * service_time` and must start inside
//! `[p - Δ, p + Δ]` (clamped at zero). A truck may wait for free, and
//! starts at the origin of its first task.

mod exact;
mod heuristic;
mod oracle;
mod rechain;
mod validate;

pub use exact::solve_exact;
pub use heuristic::{solve_heuristic, HeuristicOptions};
pub use oracle::{brute_force_oracle, OracleError, OracleOutcome, ORACLE_MAX_TASKS};
pub use rechain::{rechain_downstream, RechainedPickup};
pub use validate::{validate, Violation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MilliDollars, Miles, Minutes, Subproblem, SubproblemKind, TaskId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("subproblem {0} has tasks but no trucks")]
    NoTrucks(SubproblemKind),
    #[error("subproblem {kind}: task {task} cannot be placed on any truck")]
    Infeasible { kind: SubproblemKind, task: TaskId },
    #[error("exact search supports at most {max} tasks, got {got}")]
    TooLarge { max: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub task_id: TaskId,
    pub truck: usize,
    pub position: usize,
    pub start: Minutes,
    pub end: Minutes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: SubproblemKind,
    pub truck_count: usize,
    /// Sorted by truck, then position.
    pub assignments: Vec<ScheduledTask>,
    pub empty_cost: MilliDollars,
    pub empty_miles: Miles,
    pub status: Status,
}

impl Schedule {
    pub fn empty(sub: &Subproblem<'_>, status: Status) -> Self {
        Schedule {
            kind: sub.kind,
            truck_count: sub.truck_count,
            assignments: Vec::new(),
            empty_cost: 0,
            empty_miles: 0,
            status,
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::Feasible)
            || (self.status == Status::TimedOut && !self.assignments.is_empty())
    }

    /// Task ids per truck in sequence order.
    pub fn routes(&self) -> Vec<Vec<TaskId>> {
        let mut routes = vec![Vec::new(); self.truck_count];
        for a in &self.assignments {
            if let Some(r) = routes.get_mut(a.truck) {
                r.push((a.position, a.task_id));
            }
        }
        routes
            .into_iter()
            .map(|mut r: Vec<(usize, TaskId)>| {
                r.sort();
                r.into_iter().map(|(_, id)| id).collect()
            })
            .collect()
    }

    pub fn assignment(&self, task: TaskId) -> Option<&ScheduledTask> {
        self.assignments.iter().find(|a| a.task_id == task)
    }
}

/// Subproblem flattened to index-based arrays shared by the exact and
/// heuristic solvers. Task `i` is `sub.tasks[i]`.
pub(crate) struct Prepared {
    pub n: usize,
    pub lo: Vec<Minutes>,
    pub hi: Vec<Minutes>,
    pub duration: Vec<Minutes>,
    /// `setup_time[i * n + j]`: drive from end of `i` to start of `j`.
    pub setup_time: Vec<Minutes>,
    pub setup_cost: Vec<MilliDollars>,
    pub setup_miles: Vec<Miles>,
}

impl Prepared {
    pub fn new(sub: &Subproblem<'_>) -> Self {
        let net = sub.network;
        let n = sub.tasks.len();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        let mut duration = Vec::with_capacity(n);
        for t in &sub.tasks {
            let (a, b) = t.window(sub.config);
            lo.push(a);
            hi.push(b);
            duration.push(t.duration(net, sub.config));
        }
        let mut setup_time = vec![0; n * n];
        let mut setup_cost = vec![0; n * n];
        let mut setup_miles = vec![0; n * n];
        for (i, a) in sub.tasks.iter().enumerate() {
            for (j, b) in sub.tasks.iter().enumerate() {
                setup_time[i * n + j] = net.time(a.destination, b.origin);
                setup_cost[i * n + j] = net.cost(a.destination, b.origin);
                setup_miles[i * n + j] = net.miles(a.destination, b.origin);
            }
        }
        Prepared {
            n,
            lo,
            hi,
            duration,
            setup_time,
            setup_cost,
            setup_miles,
        }
    }

    #[inline]
    pub fn time(&self, i: usize, j: usize) -> Minutes {
        self.setup_time[i * self.n + j]
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> MilliDollars {
        self.setup_cost[i * self.n + j]
    }

    /// Earliest start of `j` when it follows a task ending at `ready` that
    /// was task `prev`.
    #[inline]
    pub fn earliest_after(&self, prev: Option<(usize, Minutes)>, j: usize) -> Minutes {
        match prev {
            None => self.lo[j],
            Some((i, ready)) => self.lo[j].max(ready + self.time(i, j)),
        }
    }

    /// Earliest-start times of a route, or `None` if some window is missed.
    pub fn route_starts(&self, route: &[usize]) -> Option<Vec<Minutes>> {
        let mut out = Vec::with_capacity(route.len());
        let mut prev = None;
        for &j in route {
            let s = self.earliest_after(prev, j);
            if s > self.hi[j] {
                return None;
            }
            out.push(s);
            prev = Some((j, s + self.duration[j]));
        }
        Some(out)
    }

    pub fn route_feasible(&self, route: &[usize]) -> bool {
        let mut prev = None;
        for &j in route {
            let s = self.earliest_after(prev, j);
            if s > self.hi[j] {
                return false;
            }
            prev = Some((j, s + self.duration[j]));
        }
        true
    }

    pub fn route_cost(&self, route: &[usize]) -> MilliDollars {
        route.windows(2).map(|w| self.cost(w[0], w[1])).sum()
    }

    pub fn route_miles(&self, route: &[usize]) -> Miles {
        route
            .windows(2)
            .map(|w| self.setup_miles[w[0] * self.n + w[1]])
            .sum()
    }

    /// Materializes routes (indices into `sub.tasks`) into a schedule with
    /// earliest start times. Routes must be feasible.
    pub fn build_schedule(
        &self,
        sub: &Subproblem<'_>,
        routes: &[Vec<usize>],
        status: Status,
    ) -> Schedule {
        let mut assignments = Vec::with_capacity(self.n);
        let mut empty_cost = 0;
        let mut empty_miles = 0;
        for (truck, route) in routes.iter().enumerate() {
            let starts = self
                .route_starts(route)
                .expect("routes handed to build_schedule are feasible");
            for (position, (&i, &start)) in route.iter().zip(&starts).enumerate() {
                assignments.push(ScheduledTask {
                    task_id: sub.tasks[i].id,
                    truck,
                    position,
                    start,
                    end: start + self.duration[i],
                });
            }
            empty_cost += self.route_cost(route);
            empty_miles += self.route_miles(route);
        }
        Schedule {
            kind: sub.kind,
            truck_count: sub.truck_count,
            assignments,
            empty_cost,
            empty_miles,
            status,
        }
    }
}

/// Trucks are interchangeable, so routes are put in a canonical order: used
/// trucks first, ordered by their first task's start time and then id.
pub(crate) fn canonical_routes(prep: &Prepared, routes: &mut Vec<Vec<usize>>, truck_count: usize) {
    routes.retain(|r| !r.is_empty());
    routes.sort_by_key(|r| {
        let first = r[0];
        (prep.route_starts(r).map_or(prep.lo[first], |s| s[0]), first)
    });
    routes.resize(truck_count.max(routes.len()), Vec::new());
}
