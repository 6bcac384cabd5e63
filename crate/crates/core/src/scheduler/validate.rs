use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Schedule;
use crate::model::{MilliDollars, Miles, Minutes, Subproblem, TaskId};

/// A broken constraint in a schedule. Violations are data: a schedule is
/// valid iff `validate` returns none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "violation")]
pub enum Violation {
    UnknownTask {
        task: TaskId,
    },
    Unassigned {
        task: TaskId,
    },
    DoublyAssigned {
        task: TaskId,
        times: usize,
    },
    TruckOutOfRange {
        task: TaskId,
        truck: usize,
    },
    /// Positions on a truck are not exactly `0..len`.
    BadPositions {
        truck: usize,
    },
    DurationMismatch {
        task: TaskId,
        expected: Minutes,
        actual: Minutes,
    },
    WindowViolation {
        task: TaskId,
        start: Minutes,
        earliest: Minutes,
        latest: Minutes,
    },
    /// `next` starts before `prev` ends plus the relocation drive.
    TransitionViolation {
        truck: usize,
        prev: TaskId,
        next: TaskId,
        required: Minutes,
        start: Minutes,
    },
    CostMismatch {
        reported: MilliDollars,
        recomputed: MilliDollars,
    },
    MilesMismatch {
        reported: Miles,
        recomputed: Miles,
    },
}

/// Re-checks every constraint of `schedule` against `sub` from scratch.
pub fn validate(schedule: &Schedule, sub: &Subproblem<'_>) -> Vec<Violation> {
    let mut out = Vec::new();
    let net = sub.network;
    let config = sub.config;

    let mut seen: BTreeMap<TaskId, usize> = BTreeMap::new();
    for a in &schedule.assignments {
        *seen.entry(a.task_id).or_default() += 1;
    }
    for (&task, &times) in &seen {
        if sub.task(task).is_none() {
            out.push(Violation::UnknownTask { task });
        } else if times > 1 {
            out.push(Violation::DoublyAssigned { task, times });
        }
    }
    for t in &sub.tasks {
        if !seen.contains_key(&t.id) {
            out.push(Violation::Unassigned { task: t.id });
        }
    }

    let mut per_truck: BTreeMap<usize, Vec<&super::ScheduledTask>> = BTreeMap::new();
    for a in &schedule.assignments {
        let Some(task) = sub.task(a.task_id) else {
            continue;
        };
        if a.truck >= sub.truck_count {
            out.push(Violation::TruckOutOfRange {
                task: a.task_id,
                truck: a.truck,
            });
        }
        let expected = task.duration(net, config);
        if a.end - a.start != expected {
            out.push(Violation::DurationMismatch {
                task: a.task_id,
                expected,
                actual: a.end - a.start,
            });
        }
        let earliest = (task.pickup_time - config.flexibility).max(0);
        let latest = task.pickup_time + config.flexibility;
        if a.start < earliest || a.start > latest {
            out.push(Violation::WindowViolation {
                task: a.task_id,
                start: a.start,
                earliest,
                latest,
            });
        }
        per_truck.entry(a.truck).or_default().push(a);
    }

    let mut cost = 0;
    let mut miles = 0;
    for (&truck, seq) in per_truck.iter_mut() {
        seq.sort_by_key(|a| (a.position, a.task_id));
        if seq.iter().enumerate().any(|(i, a)| a.position != i) {
            out.push(Violation::BadPositions { truck });
        }
        for pair in seq.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            let (Some(p), Some(q)) = (sub.task(prev.task_id), sub.task(next.task_id)) else {
                continue;
            };
            let required = prev.end + net.time(p.destination, q.origin);
            if next.start < required {
                out.push(Violation::TransitionViolation {
                    truck,
                    prev: prev.task_id,
                    next: next.task_id,
                    required,
                    start: next.start,
                });
            }
            cost += net.cost(p.destination, q.origin);
            miles += net.miles(p.destination, q.origin);
        }
    }
    if cost != schedule.empty_cost {
        out.push(Violation::CostMismatch {
            reported: schedule.empty_cost,
            recomputed: cost,
        });
    }
    if miles != schedule.empty_miles {
        out.push(Violation::MilesMismatch {
            reported: schedule.empty_miles,
            recomputed: miles,
        });
    }
    out
}
