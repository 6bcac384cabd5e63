//! Depth-first branch and bound over truck routes.
//!
//! Tasks are appended to route tails in nondecreasing order of
//! `(start, task index)`, where starts are the earliest feasible ones. Every
//! set of routes has such an append order (exactly one unless zero-length
//! tasks tie), and any unplaced task whose window closes before the
//! current start can be pruned immediately. New routes only open on the
//! lowest-index idle truck.

use std::time::{Duration, Instant};

use super::{canonical_routes, Prepared, Schedule, SolveError, Status};
use crate::model::{MilliDollars, Minutes, Subproblem};

const MAX_EXACT_TASKS: usize = 64;

/// Minimum-cost schedule by exhaustive search with bounding.
///
/// Returns `Optimal`, `Infeasible`, or `TimedOut` carrying the best
/// incumbent found before `time_limit` (possibly none).
pub fn solve_exact(sub: &Subproblem<'_>, time_limit: Duration) -> Result<Schedule, SolveError> {
    let n = sub.tasks.len();
    if n == 0 {
        return Ok(Schedule::empty(sub, Status::Optimal));
    }
    if sub.truck_count == 0 {
        return Err(SolveError::NoTrucks(sub.kind));
    }
    if n > MAX_EXACT_TASKS {
        return Err(SolveError::TooLarge {
            max: MAX_EXACT_TASKS,
            got: n,
        });
    }

    let prep = Prepared::new(sub);
    let mut search = Search::new(&prep, sub.truck_count.min(n), time_limit);
    search.run();

    let status = if search.timed_out {
        Status::TimedOut
    } else if search.best_routes.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    Ok(match search.best_routes.take() {
        Some(mut routes) => {
            canonical_routes(&prep, &mut routes, sub.truck_count);
            prep.build_schedule(sub, &routes, status)
        }
        None => Schedule::empty(sub, status),
    })
}

struct Search<'p> {
    prep: &'p Prepared,
    trucks: usize,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
    /// Cheapest feasible incoming setup for each task; zero when no other
    /// task can precede it.
    min_in: Vec<MilliDollars>,
    routes: Vec<Vec<usize>>,
    ready: Vec<Minutes>,
    placed: u64,
    best_cost: MilliDollars,
    best_routes: Option<Vec<Vec<usize>>>,
}

impl<'p> Search<'p> {
    fn new(prep: &'p Prepared, trucks: usize, time_limit: Duration) -> Self {
        let n = prep.n;
        let min_in = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| i != j && prep.lo[i] + prep.duration[i] + prep.time(i, j) <= prep.hi[j])
                    .map(|i| prep.cost(i, j))
                    .min()
                    .unwrap_or(0)
            })
            .collect();
        Search {
            prep,
            trucks,
            deadline: Instant::now() + time_limit,
            nodes: 0,
            timed_out: false,
            min_in,
            routes: Vec::with_capacity(trucks),
            ready: Vec::with_capacity(trucks),
            placed: 0,
            best_cost: MilliDollars::MAX,
            best_routes: None,
        }
    }

    fn run(&mut self) {
        self.descend(0, Minutes::MIN, 0, usize::MAX);
    }

    /// Lower bound on the setup cost still to pay for the unplaced tasks.
    /// Each needs a predecessor unless it opens one of the idle trucks.
    fn bound(&self, placed: u64, open: usize) -> MilliDollars {
        let idle = self.trucks - open;
        let mut vals: Vec<MilliDollars> = (0..self.prep.n)
            .filter(|&j| placed & (1 << j) == 0)
            .map(|j| self.min_in[j])
            .collect();
        if idle >= vals.len() {
            return 0;
        }
        vals.sort_unstable();
        vals[..vals.len() - idle].iter().sum()
    }

    fn descend(&mut self, cost: MilliDollars, last_start: Minutes, last_task: usize, last_truck: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes & 0x3ff == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        let n = self.prep.n;
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if self.placed == all {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_routes = Some(self.routes.clone());
            }
            return;
        }

        // every unplaced task must still be startable at or after last_start
        for j in 0..n {
            if self.placed & (1 << j) == 0 && self.prep.hi[j] < last_start {
                return;
            }
        }

        let open = self.routes.len();
        let mut children: Vec<(MilliDollars, usize, usize, Minutes)> = Vec::new();
        for j in 0..n {
            if self.placed & (1 << j) != 0 {
                continue;
            }
            let candidates = open + usize::from(open < self.trucks);
            for k in 0..candidates {
                let (start, add) = if k < open {
                    let tail = *self.routes[k].last().expect("open routes are nonempty");
                    let s = self.prep.earliest_after(Some((tail, self.ready[k])), j);
                    (s, self.prep.cost(tail, j))
                } else {
                    (self.prep.lo[j], 0)
                };
                if start > self.prep.hi[j] {
                    continue;
                }
                // zero-length tasks can share a start with their route
                // predecessor, so same-truck ties are always allowed
                let same_truck_tie = start == last_start && k == last_truck;
                if (start, j) <= (last_start, last_task) && !same_truck_tie {
                    continue;
                }
                children.push((add, k, j, start));
            }
        }
        children.sort_unstable();

        for (add, k, j, start) in children {
            let next_cost = cost + add;
            let placed = self.placed | (1 << j);
            let open_after = open + usize::from(k == open);
            if next_cost + self.bound(placed, open_after) >= self.best_cost {
                continue;
            }
            let end = start + self.prep.duration[j];
            let saved_ready = if k == open {
                self.routes.push(vec![j]);
                self.ready.push(end);
                None
            } else {
                self.routes[k].push(j);
                Some(std::mem::replace(&mut self.ready[k], end))
            };
            self.placed = placed;
            self.descend(next_cost, start, j, k);
            self.placed &= !(1 << j);
            match saved_ready {
                None => {
                    self.routes.pop();
                    self.ready.pop();
                }
                Some(r) => {
                    self.routes[k].pop();
                    self.ready[k] = r;
                }
            }
            if self.timed_out {
                return;
            }
        }
    }
}
