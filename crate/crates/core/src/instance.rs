//! JSON documents exchanged between the command-line verbs: instances going
//! in and schedules coming out.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costing::{CostTable, Mileage};
use crate::model::{
    Config, Fleet, Leg, LocationId, MilliDollars, Miles, Minutes, ModelError, Network, Order, OrderId,
    SubproblemKind, TaskId,
};
use crate::scheduler::Status;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FileError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<serde_json::Error> for FileError {
    fn from(e: serde_json::Error) -> Self {
        FileError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("document types serialize");
    s.push('\n');
    s
}

fn check_version(found: u32) -> Result<(), FileError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(FileError::Schema(format!(
            "schema_version {found} not supported (expected {SCHEMA_VERSION})"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub config: Config,
    pub fleet: Fleet,
    pub network: Network,
    pub orders: Vec<Order>,
}

impl InstanceFile {
    pub fn new(config: Config, fleet: Fleet, network: Network, orders: Vec<Order>) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            config,
            fleet,
            network,
            orders,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        pretty(self)
    }

    /// Checks the schema version, the configuration, that every order
    /// references customer sites inside the horizon, that order ids are
    /// unique, and that every fleet entry names a hub.
    pub fn validate(&self) -> Result<(), FileError> {
        check_version(self.schema_version)?;
        self.config.validate()?;
        let mut ids = BTreeSet::new();
        for (i, o) in self.orders.iter().enumerate() {
            o.validate(&self.network, &self.config)
                .map_err(|e| FileError::Schema(format!("orders[{i}]: {e}")))?;
            if !ids.insert(o.id) {
                return Err(FileError::Schema(format!("orders[{i}]: duplicate order id {}", o.id)));
            }
        }
        for hub in self.fleet.hub_counts.keys() {
            if !self.network.is_hub(*hub) {
                return Err(FileError::Schema(format!("fleet: location {hub} is not a hub")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: TaskId,
    pub order_id: OrderId,
    pub leg: Leg,
    pub origin: LocationId,
    pub destination: LocationId,
    pub pickup_time: Minutes,
    pub start: Minutes,
    pub end: Minutes,
}

/// Empty drive between two consecutive tasks of one truck, leaving as soon
/// as the first task ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relocation {
    pub after: TaskId,
    pub before: TaskId,
    pub from: LocationId,
    pub to: LocationId,
    pub depart: Minutes,
    pub arrive: Minutes,
    pub miles: Miles,
    pub cost: MilliDollars,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruckSchedule {
    pub truck: usize,
    pub tasks: Vec<TaskRecord>,
    pub relocations: Vec<Relocation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubproblemSchedule {
    pub kind: SubproblemKind,
    pub status: Status,
    pub truck_count: usize,
    pub empty_cost: MilliDollars,
    pub empty_miles: Miles,
    /// Only trucks with at least one task.
    pub trucks: Vec<TruckSchedule>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    pub current: Mileage,
    pub autonomous: Mileage,
    pub first_last_loaded: f64,
    /// Empty miles of the scheduled first/last-mile operations, reported
    /// next to the estimate used in the table.
    pub first_last_scheduled_empty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub schema_version: u32,
    pub seed: u64,
    pub config: Config,
    pub athn_orders: Vec<OrderId>,
    pub direct_orders: Vec<OrderId>,
    pub subproblems: Vec<SubproblemSchedule>,
    pub cost_inputs: CostInputs,
    pub cost_table: CostTable,
}

impl ScheduleFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        check_version(file.schema_version)?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        pretty(self)
    }

    pub fn subproblem(&self, kind: SubproblemKind) -> Option<&SubproblemSchedule> {
        self.subproblems.iter().find(|s| s.kind == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Location, Matrix};

    fn sample() -> InstanceFile {
        let xs = [0i64, 300, 10, 320];
        let locations = vec![
            Location::hub(0, "H0"),
            Location::hub(1, "H1"),
            Location::customer(2, "a"),
            Location::customer(3, "b"),
        ];
        let miles = Matrix::from_fn(4, |i, j| (xs[i] - xs[j]).abs());
        let net = Network::from_miles(locations, miles.clone(), miles.map(|m| m * 6 / 5), 2000).unwrap();
        let fleet = Fleet::new(3).with_hub(LocationId(0), 2).with_hub(LocationId(1), 2);
        InstanceFile::new(
            Config::default(),
            fleet,
            net,
            vec![Order::new(1, 2, 3, 0), Order::new(2, 3, 2, 600)],
        )
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = sample().to_json();
        let back = InstanceFile::from_json(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn referential_errors() {
        let mut f = sample();
        f.orders.push(Order::new(3, 2, 9, 0));
        assert!(matches!(f.validate(), Err(FileError::Schema(m)) if m.starts_with("orders[2]")));

        let mut f = sample();
        f.orders.push(Order::new(1, 2, 3, 0));
        assert!(matches!(f.validate(), Err(FileError::Schema(m)) if m.contains("duplicate")));

        let mut f = sample();
        f.fleet = f.fleet.with_hub(LocationId(2), 1);
        assert!(f.validate().is_err());

        let mut f = sample();
        f.schema_version = 7;
        assert!(InstanceFile::from_json(&f.to_json()).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = sample().to_json().replacen("\"orders\"", "\"orderz\"", 1);
        match InstanceFile::from_json(&text) {
            Err(FileError::Json { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
    }
}
