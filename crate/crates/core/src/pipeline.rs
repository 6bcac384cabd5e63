//! End-to-end run: selection, task generation, autonomous scheduling,
//! re-chaining, hub scheduling and costing.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costing::{build_cost_table, CostError, CostTable, Mileage};
use crate::instance::{
    CostInputs, InstanceFile, Relocation, ScheduleFile, SubproblemSchedule, TaskRecord, TruckSchedule,
    SCHEMA_VERSION,
};
use crate::model::{
    decompose, generate_tasks, HubAssignment, Leg, ModelError, Network, Subproblem, SubproblemKind, Task,
    TaskId,
};
use crate::scheduler::{
    rechain_downstream, solve_exact, solve_heuristic, HeuristicOptions, RechainedPickup, Schedule, SolveError,
};
use crate::selection::{select_all, Selection};

pub const DEFAULT_EXACT_THRESHOLD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Subproblems with at most this many tasks go to the exact solver.
    pub exact_threshold: usize,
    /// Per subproblem.
    pub time_limit: Duration,
    pub seed: u64,
    pub iterations: u64,
    /// Solve hub subproblems on the rayon pool.
    pub parallel: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            time_limit: Duration::from_secs(60),
            seed: 0,
            iterations: HeuristicOptions::default().iterations,
            parallel: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("subproblem {kind} is infeasible{}", task.map(|t| format!(" (task {t} cannot be placed)")).unwrap_or_default())]
    Infeasible { kind: SubproblemKind, task: Option<TaskId> },
    #[error("subproblem {0} has tasks but no trucks")]
    NoTrucks(SubproblemKind),
}

impl From<SolveError> for PipelineError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NoTrucks(kind) => PipelineError::NoTrucks(kind),
            SolveError::Infeasible { kind, task } => PipelineError::Infeasible { kind, task: Some(task) },
            SolveError::TooLarge { .. } => unreachable!("threshold keeps exact runs small"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverUsed {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub selection: Selection,
    /// First/last-mile and autonomous tasks after re-chaining.
    pub tasks: Vec<Task>,
    pub rechained: Vec<RechainedPickup>,
    /// Autonomous schedule first (when there is one), then hubs by id.
    pub schedules: Vec<(Schedule, SolverUsed)>,
    pub cost_inputs: CostInputs,
    pub cost_table: CostTable,
}

impl PipelineReport {
    pub fn autonomous(&self) -> Option<&Schedule> {
        self.schedules
            .iter()
            .map(|(s, _)| s)
            .find(|s| s.kind == SubproblemKind::AutonomousNet)
    }

    /// Empty share of autonomous miles, in percent.
    pub fn autonomous_empty_share(&self) -> f64 {
        let m = self.cost_inputs.autonomous;
        if m.total() > 0.0 {
            100.0 * m.empty / m.total()
        } else {
            0.0
        }
    }

    pub fn used_heuristic(&self) -> bool {
        self.schedules.iter().any(|(_, u)| *u == SolverUsed::Heuristic)
    }
}

fn solve(sub: &Subproblem<'_>, opts: &PipelineOptions) -> Result<(Schedule, SolverUsed), PipelineError> {
    let (schedule, used) = if sub.tasks.len() <= opts.exact_threshold {
        (solve_exact(sub, opts.time_limit)?, SolverUsed::Exact)
    } else {
        let h = HeuristicOptions::new(opts.time_limit, opts.seed).with_iterations(opts.iterations);
        (solve_heuristic(sub, &h)?, SolverUsed::Heuristic)
    };
    log::debug!(
        "{}: {} tasks, {:?} solver, status {:?}, empty cost {}",
        sub.kind,
        sub.tasks.len(),
        used,
        schedule.status,
        schedule.empty_cost
    );
    if !schedule.is_solved() {
        return Err(PipelineError::Infeasible {
            kind: sub.kind,
            task: None,
        });
    }
    Ok((schedule, used))
}

pub fn run_pipeline(instance: &InstanceFile, opts: &PipelineOptions) -> Result<PipelineReport, PipelineError> {
    let network = &instance.network;
    let config = &instance.config;
    config.validate()?;
    let hubs = if instance.orders.is_empty() {
        HubAssignment::default()
    } else {
        HubAssignment::nearest(network)?
    };
    let selection = select_all(&instance.orders, network, &hubs, config)?;

    let mut tasks = Vec::with_capacity(3 * selection.athn.len());
    for order in &selection.athn {
        tasks.extend(generate_tasks(order, network, &hubs, config)?);
    }
    let nominal = tasks.clone();

    let mut schedules = Vec::new();
    let auto_tasks: Vec<Task> = tasks.iter().filter(|t| t.leg == Leg::Autonomous).cloned().collect();
    let mut rechained = Vec::new();
    if !auto_tasks.is_empty() {
        let sub = Subproblem::new(
            SubproblemKind::AutonomousNet,
            auto_tasks,
            instance.fleet.autonomous_count,
            network,
            config,
        )?;
        if sub.truck_count == 0 {
            return Err(PipelineError::NoTrucks(sub.kind));
        }
        let solved = solve(&sub, opts)?;
        rechained = rechain_downstream(&solved.0, &mut tasks);
        schedules.push(solved);
    }

    let local: Vec<Task> = tasks.iter().filter(|t| t.leg != Leg::Autonomous).cloned().collect();
    let subs = decompose(&local, &instance.fleet, network, config).map_err(|e| match e {
        ModelError::NoTrucks(kind) => PipelineError::NoTrucks(kind),
        other => other.into(),
    })?;
    let hub_results: Vec<Result<(Schedule, SolverUsed), PipelineError>> = if opts.parallel {
        subs.par_iter().map(|s| solve(s, opts)).collect()
    } else {
        subs.iter().map(|s| solve(s, opts)).collect()
    };
    for r in hub_results {
        schedules.push(r?);
    }

    let cost_inputs = cost_inputs(&nominal, &schedules, network);
    let cost_table = build_cost_table(
        cost_inputs.current,
        cost_inputs.autonomous,
        cost_inputs.first_last_loaded,
        config,
    )?;
    Ok(PipelineReport {
        selection,
        tasks,
        rechained,
        schedules,
        cost_inputs,
        cost_table,
    })
}

/// Mileage figures for the selected orders. The current network drives each
/// order out loaded and back empty.
fn cost_inputs(tasks: &[Task], schedules: &[(Schedule, SolverUsed)], network: &Network) -> CostInputs {
    let miles = |t: &Task| network.miles(t.origin, t.destination) as f64;
    let mut inputs = CostInputs::default();
    let mut order_ends = std::collections::BTreeMap::new();
    for t in tasks {
        match t.leg {
            Leg::Autonomous => inputs.autonomous.loaded += miles(t),
            Leg::FirstMile | Leg::LastMile => inputs.first_last_loaded += miles(t),
            Leg::Direct => {}
        }
        let e = order_ends.entry(t.order_id).or_insert((None, None));
        match t.leg {
            Leg::FirstMile => e.0 = Some(t.origin),
            Leg::LastMile => e.1 = Some(t.destination),
            _ => {}
        }
    }
    for (o, d) in order_ends.values() {
        if let (Some(o), Some(d)) = (*o, *d) {
            inputs.current.loaded += network.miles(o, d) as f64;
            inputs.current.empty += network.miles(d, o) as f64;
        }
    }
    for (s, _) in schedules {
        match s.kind {
            SubproblemKind::AutonomousNet => inputs.autonomous.empty += s.empty_miles as f64,
            SubproblemKind::HubLocal(_) => inputs.first_last_scheduled_empty += s.empty_miles as f64,
        }
    }
    inputs.current = Mileage::new(inputs.current.loaded, inputs.current.empty);
    inputs
}

/// Self-contained schedule document for `report` and `gantt`.
pub fn schedule_file(report: &PipelineReport, instance: &InstanceFile, seed: u64) -> ScheduleFile {
    let network = &instance.network;
    let by_id: std::collections::BTreeMap<TaskId, &Task> = report.tasks.iter().map(|t| (t.id, t)).collect();
    let subproblems = report
        .schedules
        .iter()
        .map(|(s, _)| {
            let trucks = s
                .routes()
                .into_iter()
                .enumerate()
                .filter(|(_, r)| !r.is_empty())
                .map(|(truck, route)| {
                    let tasks: Vec<TaskRecord> = route
                        .iter()
                        .map(|id| {
                            let t = by_id[id];
                            let a = s.assignment(*id).expect("route ids come from assignments");
                            TaskRecord {
                                task_id: t.id,
                                order_id: t.order_id,
                                leg: t.leg,
                                origin: t.origin,
                                destination: t.destination,
                                pickup_time: t.pickup_time,
                                start: a.start,
                                end: a.end,
                            }
                        })
                        .collect();
                    let relocations = tasks
                        .windows(2)
                        .filter(|w| w[0].destination != w[1].origin)
                        .map(|w| Relocation {
                            after: w[0].task_id,
                            before: w[1].task_id,
                            from: w[0].destination,
                            to: w[1].origin,
                            depart: w[0].end,
                            arrive: w[0].end + network.time(w[0].destination, w[1].origin),
                            miles: network.miles(w[0].destination, w[1].origin),
                            cost: network.cost(w[0].destination, w[1].origin),
                        })
                        .collect();
                    TruckSchedule {
                        truck,
                        tasks,
                        relocations,
                    }
                })
                .collect();
            SubproblemSchedule {
                kind: s.kind,
                status: s.status,
                truck_count: s.truck_count,
                empty_cost: s.empty_cost,
                empty_miles: s.empty_miles,
                trucks,
            }
        })
        .collect();
    ScheduleFile {
        schema_version: SCHEMA_VERSION,
        seed,
        config: instance.config.clone(),
        athn_orders: report.selection.athn.iter().map(|o| o.id).collect(),
        direct_orders: report.selection.direct.iter().map(|o| o.id).collect(),
        subproblems,
        cost_inputs: report.cost_inputs.clone(),
        cost_table: report.cost_table.clone(),
    }
}
