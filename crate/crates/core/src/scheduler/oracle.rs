//! Exhaustive reference solver for tiny subproblems.
//!
//! Kept deliberately separate from the other solvers: it reads the raw
//! matrices and recomputes windows and durations itself.

use thiserror::Error;

use crate::model::{MilliDollars, Subproblem};

pub const ORACLE_MAX_TASKS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle enumerates at most {ORACLE_MAX_TASKS} tasks, got {0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOutcome {
    Feasible(MilliDollars),
    Infeasible,
}

impl OracleOutcome {
    pub fn cost(self) -> Option<MilliDollars> {
        match self {
            OracleOutcome::Feasible(c) => Some(c),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Minimum empty-relocation cost over every assignment of tasks to trucks
/// and every ordering on each truck.
///
/// For a fixed ordering, start times are propagated forward from the
/// earliest window edge; starting a task later can never help a successor,
/// so the ordering is feasible iff this propagation stays inside every
/// window.
pub fn brute_force_oracle(sub: &Subproblem<'_>) -> Result<OracleOutcome, OracleError> {
    let n = sub.tasks.len();
    if n > ORACLE_MAX_TASKS {
        return Err(OracleError::TooLarge(n));
    }
    if n == 0 {
        return Ok(OracleOutcome::Feasible(0));
    }
    if sub.truck_count == 0 {
        return Ok(OracleOutcome::Infeasible);
    }

    let net = sub.network;
    let flex = sub.config.flexibility;
    let service = sub.config.service_time;
    let tasks = &sub.tasks;
    let earliest: Vec<i64> = tasks.iter().map(|t| (t.pickup_time - flex).max(0)).collect();
    let latest: Vec<i64> = tasks.iter().map(|t| t.pickup_time + flex).collect();
    let length: Vec<i64> = tasks
        .iter()
        .map(|t| net.time(t.origin, t.destination) + 2 * service)
        .collect();

    // best single-truck cost for every subset of tasks
    let full = (1usize << n) - 1;
    let mut single: Vec<Option<MilliDollars>> = vec![None; full + 1];
    let mut seq = Vec::with_capacity(n);

    fn extend(
        seq: &mut Vec<usize>,
        mask: usize,
        finish: i64,
        cost: MilliDollars,
        ctx: &Ctx<'_>,
        single: &mut [Option<MilliDollars>],
    ) {
        for j in 0..ctx.n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let (start, add) = match seq.last() {
                None => (ctx.earliest[j], 0),
                Some(&i) => {
                    let from = ctx.sub.tasks[i].destination;
                    let to = ctx.sub.tasks[j].origin;
                    (
                        ctx.earliest[j].max(finish + ctx.sub.network.time(from, to)),
                        ctx.sub.network.cost(from, to),
                    )
                }
            };
            if start > ctx.latest[j] {
                continue;
            }
            let next = mask | (1 << j);
            let c = cost + add;
            if single[next].is_none_or(|b| c < b) {
                single[next] = Some(c);
            }
            seq.push(j);
            extend(seq, next, start + ctx.length[j], c, ctx, single);
            seq.pop();
        }
    }

    struct Ctx<'a> {
        n: usize,
        sub: &'a Subproblem<'a>,
        earliest: &'a [i64],
        latest: &'a [i64],
        length: &'a [i64],
    }

    let ctx = Ctx {
        n,
        sub,
        earliest: &earliest,
        latest: &latest,
        length: &length,
    };
    extend(&mut seq, 0, 0, 0, &ctx, &mut single);

    // split the task set into at most `truck_count` nonempty blocks
    fn partition(remaining: usize, trucks: usize, single: &[Option<MilliDollars>]) -> Option<MilliDollars> {
        if remaining == 0 {
            return Some(0);
        }
        if trucks == 0 {
            return None;
        }
        let low = remaining & remaining.wrapping_neg();
        let rest = remaining & !low;
        let mut best: Option<MilliDollars> = None;
        // every subset of `rest`, joined with the lowest task
        let mut sub = rest;
        loop {
            let block = sub | low;
            if let Some(c) = single[block] {
                if let Some(tail) = partition(remaining & !block, trucks - 1, single) {
                    let total = c + tail;
                    if best.is_none_or(|b| total < b) {
                        best = Some(total);
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best
    }

    Ok(match partition(full, sub.truck_count, &single) {
        Some(c) => OracleOutcome::Feasible(c),
        None => OracleOutcome::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Config, Leg, Location, LocationId, Matrix, Network, OrderId, SubproblemKind, Task,
    };

    fn task(order: u64, o: usize, d: usize, p: i64) -> Task {
        Task::new(OrderId(order), Leg::Autonomous, LocationId(o), LocationId(d), p)
    }

    fn two_hubs() -> Network {
        let locs = vec![Location::hub(0, "h1"), Location::hub(1, "h2")];
        let m = Matrix::from_rows(vec![vec![0, 100], vec![100, 0]]).unwrap();
        Network::from_miles(locs, m.clone(), m, 1000).unwrap()
    }

    #[test]
    fn no_tasks_costs_nothing() {
        let net = two_hubs();
        let config = Config::default();
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, vec![], 1, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Feasible(0));
    }

    #[test]
    fn chained_pair_costs_nothing() {
        let net = two_hubs();
        let config = Config::default();
        // duration(A) = 100 + 60
        let tasks = vec![task(0, 0, 1, 0), task(1, 1, 0, 160)];
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 1, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Feasible(0));
    }

    #[test]
    fn three_tasks_one_truck_hand_enumerated() {
        // Hubs on a line at 0, 100, 250, 400 miles; 1 mile = 1 minute.
        let xs = [0i64, 100, 250, 400];
        let locs = (0..4).map(|i| Location::hub(i, format!("h{i}"))).collect();
        let m = Matrix::from_fn(4, |i, j| (xs[i] - xs[j]).abs());
        let net = Network::from_miles(locs, m.clone(), m, 1).unwrap();
        let config = Config {
            service_time: 0,
            flexibility: 10_000,
            ..Config::default()
        };
        // A: 0->1, B: 2->3, C: 1->2 with wide windows, so only the cost of
        // the ordering matters. Orderings (setup = |d(prev) - o(next)|):
        //   ABC: |100-250| + |400-100| = 150 + 300 = 450
        //   ACB: |100-100| + |250-250| = 0
        //   BAC: |400-0| + |100-100| = 400
        //   BCA: |400-100| + |250-0| = 300 + 250 = 550
        //   CAB: |250-0| + |100-250| = 250 + 150 = 400
        //   CBA: |250-250| + |400-0| = 400
        // minimum 0 (ACB).
        let tasks = vec![task(0, 0, 1, 5000), task(1, 2, 3, 5000), task(2, 1, 2, 5000)];
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 1, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Feasible(0));

        // No ordering chains for free: A 0->1, B 2->0, C 3->1.
        //   ABC: |100-250| + |0-400| = 150 + 400 = 550
        //   ACB: |100-400| + |100-250| = 300 + 150 = 450
        //   BAC: |0-0| + |100-400| = 300
        //   BCA: |0-400| + |100-0| = 400 + 100 = 500
        //   CAB: |100-0| + |100-250| = 100 + 150 = 250
        //   CBA: |100-250| + |0-0| = 150
        let tasks = vec![task(0, 0, 1, 5000), task(1, 2, 0, 5000), task(2, 3, 1, 5000)];
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 1, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Feasible(150));
    }

    #[test]
    fn infeasible_when_overlapping_on_one_truck() {
        let net = two_hubs();
        let config = Config {
            flexibility: 0,
            ..Config::default()
        };
        let tasks = vec![task(0, 0, 1, 0), task(1, 0, 1, 10)];
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks.clone(), 1, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Infeasible);
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 2, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub).unwrap(), OracleOutcome::Feasible(0));
    }

    #[test]
    fn too_large() {
        let net = two_hubs();
        let config = Config::default();
        let tasks = (0..9).map(|k| task(k, 0, 1, 0)).collect();
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 9, &net, &config).unwrap();
        assert_eq!(brute_force_oracle(&sub), Err(OracleError::TooLarge(9)));
    }
}
