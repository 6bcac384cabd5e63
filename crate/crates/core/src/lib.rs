//! Scheduling toolkit for freight on autonomous transfer hub networks.
//!
//! Orders are split into a first-mile leg (customer to hub), an autonomous
//! hub-to-hub leg and a last-mile leg (hub to customer). The autonomous legs
//! and each hub's local legs form independent subproblems, each solved to
//! minimize the cost of driving empty between tasks.
//!
//! Module map:
//!
//! * [`model`]: locations, matrices, orders, tasks and decomposition.
//! * [`ingest`]: stop-record parsing, loaded/empty leg attribution and hub
//!   placement.
//! * [`selection`]: per-order choice between a direct trip and the hub
//!   network.
//! * [`scheduler`]: exact and heuristic solvers, validator and reference
//!   oracle.
//! * [`costing`]: cost tables and scenario sweeps.
//! * [`instance`], [`synth`], [`pipeline`], [`gantt`]: file formats,
//!   synthetic instances, end-to-end runs and SVG output.

pub mod costing;
pub mod gantt;
pub mod ingest;
pub mod instance;
pub mod model;
pub mod pipeline;
pub mod scheduler;
pub mod selection;
pub mod synth;

pub use model::{
    Config, Fleet, HubAssignment, Leg, Location, LocationId, Network, Order, OrderId, Subproblem,
    SubproblemKind, Task, TaskId,
};
