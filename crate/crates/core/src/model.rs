//! Domain types for transfer hub networks: locations, travel matrices,
//! orders, the three legs each order is split into, and the partition of
//! those legs into independently schedulable subproblems.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Minutes from the start of the planning horizon.
pub type Minutes = i64;
/// Money in thousandths of a dollar.
pub type MilliDollars = i64;
/// Road distance in whole miles.
pub type Miles = i64;

/// One week.
pub const DEFAULT_HORIZON: Minutes = 7 * 24 * 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("location ids must be dense and ordered: position {position} holds id {id}")]
    NonDenseLocations { position: usize, id: usize },
    #[error("{matrix} matrix is {rows}x{cols}, expected {n}x{n}")]
    MatrixShape {
        matrix: &'static str,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("{matrix} matrix has nonzero diagonal at location {at}")]
    NonZeroDiagonal { matrix: &'static str, at: usize },
    #[error("{matrix} matrix has negative entry at ({from}, {to})")]
    NegativeEntry {
        matrix: &'static str,
        from: usize,
        to: usize,
    },
    #[error("unknown location {0}")]
    UnknownLocation(LocationId),
    #[error("order {0}: origin equals destination")]
    DegenerateOrder(OrderId),
    #[error("order {order}: pickup time {pickup} outside horizon [0, {horizon})")]
    PickupOutsideHorizon {
        order: OrderId,
        pickup: Minutes,
        horizon: Minutes,
    },
    #[error("order {order}: location {location} is not a customer site")]
    NotACustomer { order: OrderId, location: LocationId },
    #[error("customer {0} has no designated hub")]
    MissingHub(LocationId),
    #[error("network has no hub locations")]
    NoHubs,
    #[error("order {order}: origin and destination both map to hub {hub}")]
    SameHub { order: OrderId, hub: LocationId },
    #[error("subproblem {0} has tasks but no trucks")]
    NoTrucks(SubproblemKind),
    #[error("task {task} does not belong in subproblem {kind}")]
    MisplacedTask { task: TaskId, kind: SubproblemKind },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocationId(pub usize);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderId(pub u64);

impl fmt::Display for OrderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Task ids encode the parent order and the leg, so sorting by id groups
/// the legs of an order together in first/autonomous/last order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u64);

impl TaskId {
    pub fn new(order: OrderId, leg: Leg) -> Self {
        TaskId(order.0 * 4 + leg.code())
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    Hub,
    Customer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: LocationId,
    pub kind: LocationKind,
    pub label: String,
    /// Schematic coordinates in miles, used only for drawing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<(f64, f64)>,
}

impl Location {
    pub fn hub(id: usize, label: impl Into<String>) -> Self {
        Location {
            id: LocationId(id),
            kind: LocationKind::Hub,
            label: label.into(),
            position: None,
        }
    }

    pub fn customer(id: usize, label: impl Into<String>) -> Self {
        Location {
            id: LocationId(id),
            kind: LocationKind::Customer,
            label: label.into(),
            position: None,
        }
    }

    pub fn is_hub(&self) -> bool {
        self.kind == LocationKind::Hub
    }
}

/// Dense square matrix of nonnegative integers indexed by location id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, (usize, usize)> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err((n, row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).map(<[i64]>::to_vec).take(self.n).collect()
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> i64 {
        self.data[from * self.n + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: i64) {
        self.data[from * self.n + to] = value;
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn check(&self, name: &'static str, n: usize) -> Result<(), ModelError> {
        if self.n != n {
            return Err(ModelError::MatrixShape {
                matrix: name,
                rows: self.n,
                cols: self.n,
                n,
            });
        }
        for i in 0..n {
            if self.get(i, i) != 0 {
                return Err(ModelError::NonZeroDiagonal { matrix: name, at: i });
            }
            for j in 0..n {
                if self.get(i, j) < 0 {
                    return Err(ModelError::NegativeEntry {
                        matrix: name,
                        from: i,
                        to: j,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(|(n, len)| {
            serde::de::Error::custom(format!("matrix row of length {len}, expected {n}"))
        })
    }
}

/// Locations plus the distance, travel time and travel cost between every
/// pair of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr", into = "NetworkRepr")]
pub struct Network {
    locations: Vec<Location>,
    miles: Matrix,
    travel_time: Matrix,
    travel_cost: Matrix,
}

#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    locations: Vec<Location>,
    miles: Matrix,
    travel_time: Matrix,
    travel_cost: Matrix,
}

impl TryFrom<NetworkRepr> for Network {
    type Error = ModelError;
    fn try_from(r: NetworkRepr) -> Result<Self, Self::Error> {
        Network::new(r.locations, r.miles, r.travel_time, r.travel_cost)
    }
}

impl From<Network> for NetworkRepr {
    fn from(n: Network) -> Self {
        NetworkRepr {
            locations: n.locations,
            miles: n.miles,
            travel_time: n.travel_time,
            travel_cost: n.travel_cost,
        }
    }
}

impl Network {
    pub fn new(
        locations: Vec<Location>,
        miles: Matrix,
        travel_time: Matrix,
        travel_cost: Matrix,
    ) -> Result<Self, ModelError> {
        for (position, loc) in locations.iter().enumerate() {
            if loc.id.0 != position {
                return Err(ModelError::NonDenseLocations {
                    position,
                    id: loc.id.0,
                });
            }
        }
        let n = locations.len();
        miles.check("miles", n)?;
        travel_time.check("travel_time", n)?;
        travel_cost.check("travel_cost", n)?;
        Ok(Network {
            locations,
            miles,
            travel_time,
            travel_cost,
        })
    }

    /// Builds a network whose travel cost is `miles * cost_per_mile`.
    pub fn from_miles(
        locations: Vec<Location>,
        miles: Matrix,
        travel_time: Matrix,
        cost_per_mile: MilliDollars,
    ) -> Result<Self, ModelError> {
        let cost = miles.map(|m| m * cost_per_mile);
        Network::new(locations, miles, travel_time, cost)
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, id: LocationId) -> Option<&Location> {
        self.locations.get(id.0)
    }

    pub fn contains(&self, id: LocationId) -> bool {
        id.0 < self.locations.len()
    }

    pub fn is_hub(&self, id: LocationId) -> bool {
        self.location(id).is_some_and(Location::is_hub)
    }

    pub fn hubs(&self) -> impl Iterator<Item = LocationId> + '_ {
        self.locations.iter().filter(|l| l.is_hub()).map(|l| l.id)
    }

    pub fn customers(&self) -> impl Iterator<Item = LocationId> + '_ {
        self.locations.iter().filter(|l| !l.is_hub()).map(|l| l.id)
    }

    #[inline]
    pub fn time(&self, from: LocationId, to: LocationId) -> Minutes {
        self.travel_time.get(from.0, to.0)
    }

    #[inline]
    pub fn cost(&self, from: LocationId, to: LocationId) -> MilliDollars {
        self.travel_cost.get(from.0, to.0)
    }

    #[inline]
    pub fn miles(&self, from: LocationId, to: LocationId) -> Miles {
        self.miles.get(from.0, to.0)
    }

    pub fn miles_matrix(&self) -> &Matrix {
        &self.miles
    }

    pub fn time_matrix(&self) -> &Matrix {
        &self.travel_time
    }

    pub fn cost_matrix(&self) -> &Matrix {
        &self.travel_cost
    }

    /// Same network with every travel cost multiplied by `factor`.
    pub fn with_scaled_cost(&self, factor: i64) -> Network {
        Network {
            travel_cost: self.travel_cost.map(|c| c * factor),
            ..self.clone()
        }
    }
}

/// A fraction in [0, 1] held in basis points so that cost comparisons stay
/// in integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(u32);

impl Fraction {
    pub const ONE_BP: u32 = 10_000;

    pub fn from_bp(bp: u32) -> Self {
        Fraction(bp.min(Self::ONE_BP))
    }

    /// Rounds to the nearest basis point.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return None;
        }
        Some(Fraction((value * Self::ONE_BP as f64).round() as u32))
    }

    pub fn bp(self) -> u32 {
        self.0
    }

    /// `1 - self` in basis points.
    pub fn complement_bp(self) -> u32 {
        Self::ONE_BP - self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::ONE_BP as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Fraction::from_f64(v)
            .ok_or_else(|| serde::de::Error::custom(format!("fraction {v} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Time to load or unload a trailer.
    pub service_time: Minutes,
    /// Allowed deviation of a task start from its nominal pickup time.
    pub flexibility: Minutes,
    /// Per-mile cost reduction of autonomous trucks.
    pub alpha: Fraction,
    pub cost_per_mile: MilliDollars,
    pub horizon: Minutes,
    /// Estimated share of empty miles in first/last-mile operations.
    pub first_last_empty_ratio: Fraction,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            service_time: 30,
            flexibility: 60,
            alpha: Fraction::from_bp(2_500),
            cost_per_mile: 2_000,
            horizon: DEFAULT_HORIZON,
            first_last_empty_ratio: Fraction::from_bp(2_500),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.service_time < 0 {
            return Err(ModelError::Config("service time must be >= 0".into()));
        }
        if self.flexibility < 0 {
            return Err(ModelError::Config("flexibility must be >= 0".into()));
        }
        if self.alpha.bp() >= Fraction::ONE_BP {
            return Err(ModelError::Config("alpha must be < 1".into()));
        }
        if self.first_last_empty_ratio.bp() >= Fraction::ONE_BP {
            return Err(ModelError::Config("empty ratio must be < 1".into()));
        }
        if self.horizon <= 0 {
            return Err(ModelError::Config("horizon must be > 0".into()));
        }
        if self.cost_per_mile < 0 {
            return Err(ModelError::Config("cost per mile must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub origin: LocationId,
    pub destination: LocationId,
    pub pickup_time: Minutes,
}

impl Order {
    pub fn new(id: u64, origin: usize, destination: usize, pickup_time: Minutes) -> Self {
        Order {
            id: OrderId(id),
            origin: LocationId(origin),
            destination: LocationId(destination),
            pickup_time,
        }
    }

    pub fn validate(&self, network: &Network, config: &Config) -> Result<(), ModelError> {
        for loc in [self.origin, self.destination] {
            match network.location(loc) {
                None => return Err(ModelError::UnknownLocation(loc)),
                Some(l) if l.is_hub() => {
                    return Err(ModelError::NotACustomer {
                        order: self.id,
                        location: loc,
                    })
                }
                Some(_) => {}
            }
        }
        if self.origin == self.destination {
            return Err(ModelError::DegenerateOrder(self.id));
        }
        if self.pickup_time < 0 || self.pickup_time >= config.horizon {
            return Err(ModelError::PickupOutsideHorizon {
                order: self.id,
                pickup: self.pickup_time,
                horizon: config.horizon,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    FirstMile,
    Autonomous,
    LastMile,
    Direct,
}

impl Leg {
    fn code(self) -> u64 {
        match self {
            Leg::FirstMile => 0,
            Leg::Autonomous => 1,
            Leg::LastMile => 2,
            Leg::Direct => 3,
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::FirstMile => "first-mile",
            Leg::Autonomous => "autonomous",
            Leg::LastMile => "last-mile",
            Leg::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub order_id: OrderId,
    pub leg: Leg,
    pub origin: LocationId,
    pub destination: LocationId,
    pub pickup_time: Minutes,
}

impl Task {
    pub fn new(
        order_id: OrderId,
        leg: Leg,
        origin: LocationId,
        destination: LocationId,
        pickup_time: Minutes,
    ) -> Self {
        Task {
            id: TaskId::new(order_id, leg),
            order_id,
            leg,
            origin,
            destination,
            pickup_time,
        }
    }

    /// Load, drive and unload.
    pub fn duration(&self, network: &Network, config: &Config) -> Minutes {
        network.time(self.origin, self.destination) + 2 * config.service_time
    }

    /// Admissible start times `[max(0, p - Δ), p + Δ]`.
    pub fn window(&self, config: &Config) -> (Minutes, Minutes) {
        (
            (self.pickup_time - config.flexibility).max(0),
            self.pickup_time + config.flexibility,
        )
    }

    /// The transfer hub this task touches, if it is a first or last-mile leg.
    pub fn hub_endpoint(&self) -> Option<LocationId> {
        match self.leg {
            Leg::FirstMile => Some(self.destination),
            Leg::LastMile => Some(self.origin),
            Leg::Autonomous | Leg::Direct => None,
        }
    }
}

/// Designated transfer hub of every customer location.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HubAssignment {
    map: BTreeMap<LocationId, LocationId>,
}

impl HubAssignment {
    /// Assigns every customer to the hub with the lowest travel cost from
    /// the customer, breaking ties by lowest hub id.
    pub fn nearest(network: &Network) -> Result<Self, ModelError> {
        let hubs: Vec<LocationId> = network.hubs().collect();
        if hubs.is_empty() {
            return Err(ModelError::NoHubs);
        }
        let map = network
            .customers()
            .map(|c| {
                let hub = hubs
                    .iter()
                    .copied()
                    .min_by_key(|&h| (network.cost(c, h), h))
                    .expect("nonempty");
                (c, hub)
            })
            .collect();
        Ok(HubAssignment { map })
    }

    pub fn from_map(map: BTreeMap<LocationId, LocationId>) -> Self {
        HubAssignment { map }
    }

    pub fn hub_of(&self, customer: LocationId) -> Option<LocationId> {
        self.map.get(&customer).copied()
    }

    pub fn require(&self, customer: LocationId) -> Result<LocationId, ModelError> {
        self.hub_of(customer)
            .ok_or(ModelError::MissingHub(customer))
    }
}

/// Splits an order into its first-mile, autonomous and last-mile tasks with
/// chained nominal pickup times.
pub fn generate_tasks(
    order: &Order,
    network: &Network,
    hub_of: &HubAssignment,
    config: &Config,
) -> Result<[Task; 3], ModelError> {
    let origin_hub = hub_of.require(order.origin)?;
    let destination_hub = hub_of.require(order.destination)?;
    if origin_hub == destination_hub {
        return Err(ModelError::SameHub {
            order: order.id,
            hub: origin_hub,
        });
    }
    let first = Task::new(
        order.id,
        Leg::FirstMile,
        order.origin,
        origin_hub,
        order.pickup_time,
    );
    let auto_pickup = first.pickup_time + first.duration(network, config);
    let autonomous = Task::new(
        order.id,
        Leg::Autonomous,
        origin_hub,
        destination_hub,
        auto_pickup,
    );
    let last_pickup = autonomous.pickup_time + autonomous.duration(network, config);
    let last = Task::new(
        order.id,
        Leg::LastMile,
        destination_hub,
        order.destination,
        last_pickup,
    );
    Ok([first, autonomous, last])
}

/// A single task for an order served end-to-end by a conventional truck.
pub fn direct_task(order: &Order) -> Task {
    Task::new(
        order.id,
        Leg::Direct,
        order.origin,
        order.destination,
        order.pickup_time,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fleet {
    pub autonomous_count: usize,
    #[serde(with = "hub_count_list")]
    pub hub_counts: BTreeMap<LocationId, usize>,
}

impl Fleet {
    pub const DEFAULT_AUTONOMOUS: usize = 50;

    pub fn new(autonomous_count: usize) -> Self {
        Fleet {
            autonomous_count,
            hub_counts: BTreeMap::new(),
        }
    }

    pub fn with_hub(mut self, hub: LocationId, count: usize) -> Self {
        self.hub_counts.insert(hub, count);
        self
    }

    pub fn hub_count(&self, hub: LocationId) -> usize {
        self.hub_counts.get(&hub).copied().unwrap_or(0)
    }
}

mod hub_count_list {
    use super::LocationId;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        hub: LocationId,
        trucks: usize,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<LocationId, usize>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(&hub, &trucks)| Entry { hub, trucks })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<LocationId, usize>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| (e.hub, e.trucks))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "hub")]
pub enum SubproblemKind {
    AutonomousNet,
    HubLocal(LocationId),
}

impl fmt::Display for SubproblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubproblemKind::AutonomousNet => f.write_str("autonomous"),
            SubproblemKind::HubLocal(h) => write!(f, "hub {h}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruckClass {
    Autonomous,
    Regular,
}

/// A slice of the tasks that can be scheduled on its own truck set.
#[derive(Debug, Clone)]
pub struct Subproblem<'a> {
    pub kind: SubproblemKind,
    /// Sorted by id.
    pub tasks: Vec<Task>,
    pub truck_count: usize,
    pub truck_class: TruckClass,
    pub network: &'a Network,
    pub config: &'a Config,
}

impl<'a> Subproblem<'a> {
    pub fn new(
        kind: SubproblemKind,
        mut tasks: Vec<Task>,
        truck_count: usize,
        network: &'a Network,
        config: &'a Config,
    ) -> Result<Self, ModelError> {
        for t in &tasks {
            let fits = match kind {
                SubproblemKind::AutonomousNet => t.leg == Leg::Autonomous,
                SubproblemKind::HubLocal(h) => t.hub_endpoint() == Some(h),
            };
            if !fits {
                return Err(ModelError::MisplacedTask { task: t.id, kind });
            }
            for loc in [t.origin, t.destination] {
                if !network.contains(loc) {
                    return Err(ModelError::UnknownLocation(loc));
                }
            }
        }
        tasks.sort_by_key(|t| t.id);
        let truck_class = match kind {
            SubproblemKind::AutonomousNet => TruckClass::Autonomous,
            SubproblemKind::HubLocal(_) => TruckClass::Regular,
        };
        Ok(Subproblem {
            kind,
            tasks,
            truck_count,
            truck_class,
            network,
            config,
        })
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks
            .binary_search_by_key(&id, |t| t.id)
            .ok()
            .map(|i| &self.tasks[i])
    }
}

/// Partitions tasks into the autonomous subproblem and one subproblem per
/// hub with first/last-mile work. Direct tasks are left out.
pub fn decompose<'a>(
    tasks: &[Task],
    fleet: &Fleet,
    network: &'a Network,
    config: &'a Config,
) -> Result<Vec<Subproblem<'a>>, ModelError> {
    let mut autonomous = Vec::new();
    let mut local: BTreeMap<LocationId, Vec<Task>> = BTreeMap::new();
    for t in tasks {
        match t.leg {
            Leg::Autonomous => autonomous.push(t.clone()),
            Leg::FirstMile | Leg::LastMile => {
                let hub = t.hub_endpoint().expect("first/last-mile legs touch a hub");
                local.entry(hub).or_default().push(t.clone());
            }
            Leg::Direct => {}
        }
    }

    let mut out = Vec::with_capacity(local.len() + 1);
    if !autonomous.is_empty() {
        if fleet.autonomous_count == 0 {
            return Err(ModelError::NoTrucks(SubproblemKind::AutonomousNet));
        }
        out.push(Subproblem::new(
            SubproblemKind::AutonomousNet,
            autonomous,
            fleet.autonomous_count,
            network,
            config,
        )?);
    }
    for (hub, hub_tasks) in local {
        let kind = SubproblemKind::HubLocal(hub);
        let trucks = fleet.hub_count(hub);
        if trucks == 0 {
            return Err(ModelError::NoTrucks(kind));
        }
        out.push(Subproblem::new(kind, hub_tasks, trucks, network, config)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two hubs (0, 1) and three customers (2, 3, 4). Customer 2 is near
    /// hub 0, customers 3 and 4 near hub 1.
    fn line_network() -> Network {
        let xs = [0i64, 300, 10, 290, 320];
        let locations = vec![
            Location::hub(0, "H0"),
            Location::hub(1, "H1"),
            Location::customer(2, "C2"),
            Location::customer(3, "C3"),
            Location::customer(4, "C4"),
        ];
        let miles = Matrix::from_fn(5, |i, j| (xs[i] - xs[j]).abs());
        let minutes = miles.map(|m| m * 6 / 5);
        Network::from_miles(locations, miles, minutes, 2000).unwrap()
    }

    #[test]
    fn first_leg_chaining_with_service_time() {
        // p(r)=0, tau(o,h1)=90, S=30 -> p(t^a)=150
        let locations = vec![
            Location::hub(0, "H0"),
            Location::hub(1, "H1"),
            Location::customer(2, "A"),
            Location::customer(3, "B"),
        ];
        let mut minutes = Matrix::zeros(4);
        let mut miles = Matrix::zeros(4);
        for (a, b, t) in [(2, 0, 90), (0, 1, 200), (1, 3, 40), (2, 1, 400), (3, 0, 400)] {
            minutes.set(a, b, t);
            minutes.set(b, a, t);
            miles.set(a, b, t);
            miles.set(b, a, t);
        }
        let minutes_23 = 500;
        minutes.set(2, 3, minutes_23);
        minutes.set(3, 2, minutes_23);
        miles.set(2, 3, minutes_23);
        miles.set(3, 2, minutes_23);
        let net = Network::from_miles(locations, miles, minutes, 1).unwrap();
        let hubs = HubAssignment::nearest(&net).unwrap();
        let config = Config::default();
        let [f, a, l] = generate_tasks(&Order::new(1, 2, 3, 0), &net, &hubs, &config).unwrap();
        assert_eq!(f.pickup_time, 0);
        assert_eq!(a.pickup_time, 150);
        assert_eq!(l.pickup_time, 150 + 200 + 60);
        assert_eq!(f.destination, LocationId(0));
        assert_eq!(a.origin, LocationId(0));
        assert_eq!(a.destination, LocationId(1));
        assert_eq!(l.origin, LocationId(1));
        assert_eq!(l.destination, LocationId(3));
    }

    #[test]
    fn zero_service_customer_at_hub() {
        // Customer sits on its hub: zero travel time, S = 0.
        let locations = vec![
            Location::hub(0, "H0"),
            Location::hub(1, "H1"),
            Location::customer(2, "A"),
            Location::customer(3, "B"),
        ];
        let coords = [0i64, 100, 0, 100];
        let miles = Matrix::from_fn(4, |i, j| (coords[i] - coords[j]).abs());
        let net = Network::from_miles(locations, miles.clone(), miles, 1).unwrap();
        let hubs = HubAssignment::nearest(&net).unwrap();
        let config = Config {
            service_time: 0,
            ..Config::default()
        };
        let [f, a, l] = generate_tasks(&Order::new(7, 2, 3, 0), &net, &hubs, &config).unwrap();
        assert_eq!(f.duration(&net, &config), 0);
        assert_eq!(a.pickup_time, 0);
        assert_eq!(l.pickup_time, 100);
    }

    #[test]
    fn same_hub_is_rejected() {
        let net = line_network();
        let hubs = HubAssignment::nearest(&net).unwrap();
        let err = generate_tasks(&Order::new(3, 3, 4, 0), &net, &hubs, &Config::default())
            .unwrap_err();
        assert_eq!(
            err,
            ModelError::SameHub {
                order: OrderId(3),
                hub: LocationId(1)
            }
        );
    }

    #[test]
    fn nearest_hub_ties_break_to_lowest_id() {
        let locations = vec![
            Location::hub(0, "H0"),
            Location::hub(1, "H1"),
            Location::customer(2, "mid"),
        ];
        let xs = [0i64, 100, 50];
        let miles = Matrix::from_fn(3, |i, j| (xs[i] - xs[j]).abs());
        let net = Network::from_miles(locations, miles.clone(), miles, 1).unwrap();
        let hubs = HubAssignment::nearest(&net).unwrap();
        assert_eq!(hubs.hub_of(LocationId(2)), Some(LocationId(0)));
    }

    #[test]
    fn network_rejects_bad_matrices() {
        let locs = vec![Location::hub(0, "a"), Location::hub(1, "b")];
        let mut m = Matrix::zeros(2);
        m.set(0, 0, 1);
        assert!(matches!(
            Network::new(locs.clone(), m.clone(), Matrix::zeros(2), Matrix::zeros(2)),
            Err(ModelError::NonZeroDiagonal { .. })
        ));
        let mut neg = Matrix::zeros(2);
        neg.set(0, 1, -3);
        assert!(matches!(
            Network::new(locs.clone(), Matrix::zeros(2), neg, Matrix::zeros(2)),
            Err(ModelError::NegativeEntry { .. })
        ));
        assert!(matches!(
            Network::new(locs, Matrix::zeros(3), Matrix::zeros(2), Matrix::zeros(2)),
            Err(ModelError::MatrixShape { .. })
        ));
        let shuffled = vec![Location::hub(1, "a"), Location::hub(0, "b")];
        assert!(Network::new(shuffled, Matrix::zeros(2), Matrix::zeros(2), Matrix::zeros(2)).is_err());
    }

    #[test]
    fn order_validation() {
        let net = line_network();
        let config = Config::default();
        assert!(Order::new(1, 2, 3, 0).validate(&net, &config).is_ok());
        assert_eq!(
            Order::new(1, 2, 2, 0).validate(&net, &config),
            Err(ModelError::DegenerateOrder(OrderId(1)))
        );
        assert!(Order::new(1, 0, 3, 0).validate(&net, &config).is_err());
        assert!(Order::new(1, 2, 3, config.horizon).validate(&net, &config).is_err());
        assert!(Order::new(1, 2, 9, 0).validate(&net, &config).is_err());
    }

    #[test]
    fn two_orders_sharing_hubs_decompose_into_three_parts() {
        let net = line_network();
        let hubs = HubAssignment::nearest(&net).unwrap();
        let config = Config::default();
        let mut tasks = Vec::new();
        for o in [Order::new(1, 2, 3, 0), Order::new(2, 2, 4, 100)] {
            tasks.extend(generate_tasks(&o, &net, &hubs, &config).unwrap());
        }
        let fleet = Fleet::new(5)
            .with_hub(LocationId(0), 2)
            .with_hub(LocationId(1), 2);
        let subs = decompose(&tasks, &fleet, &net, &config).unwrap();
        assert_eq!(subs.len(), 3);
        assert_eq!(subs[0].kind, SubproblemKind::AutonomousNet);
        assert_eq!(subs[0].tasks.len(), 2);
        assert_eq!(subs[0].truck_count, 5);
        assert_eq!(subs[1].kind, SubproblemKind::HubLocal(LocationId(0)));
        assert_eq!(subs[1].tasks.len(), 2);
        assert_eq!(subs[2].kind, SubproblemKind::HubLocal(LocationId(1)));
        assert_eq!(subs[2].tasks.len(), 2);
    }

    #[test]
    fn decompose_empty_and_no_trucks() {
        let net = line_network();
        let config = Config::default();
        assert!(decompose(&[], &Fleet::new(0), &net, &config).unwrap().is_empty());

        let hubs = HubAssignment::nearest(&net).unwrap();
        let tasks = generate_tasks(&Order::new(1, 2, 3, 0), &net, &hubs, &config).unwrap();
        let err = decompose(&tasks, &Fleet::new(0), &net, &config).unwrap_err();
        assert_eq!(err, ModelError::NoTrucks(SubproblemKind::AutonomousNet));
        let err = decompose(&tasks, &Fleet::new(1), &net, &config).unwrap_err();
        assert_eq!(err, ModelError::NoTrucks(SubproblemKind::HubLocal(LocationId(0))));
    }

    #[test]
    fn direct_tasks_are_not_scheduled_here() {
        let net = line_network();
        let config = Config::default();
        let tasks = vec![direct_task(&Order::new(1, 2, 3, 0))];
        assert!(decompose(&tasks, &Fleet::new(1), &net, &config).unwrap().is_empty());
    }

    #[test]
    fn subproblem_rejects_misplaced_tasks() {
        let net = line_network();
        let config = Config::default();
        let hubs = HubAssignment::nearest(&net).unwrap();
        let [f, ..] = generate_tasks(&Order::new(1, 2, 3, 0), &net, &hubs, &config).unwrap();
        assert!(Subproblem::new(SubproblemKind::AutonomousNet, vec![f.clone()], 1, &net, &config).is_err());
        assert!(Subproblem::new(SubproblemKind::HubLocal(LocationId(1)), vec![f.clone()], 1, &net, &config).is_err());
        assert!(Subproblem::new(SubproblemKind::HubLocal(LocationId(0)), vec![f], 1, &net, &config).is_ok());
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = Config::default();
        assert_eq!(c.service_time, 30);
        assert_eq!(c.flexibility, 60);
        assert_eq!(c.alpha.bp(), 2500);
        assert_eq!(c.cost_per_mile, 2000);
        assert_eq!(c.horizon, 10080);
        assert!(c.validate().is_ok());
        assert!(Config { alpha: Fraction::from_bp(10_000), ..c.clone() }.validate().is_err());
        assert!(Config { horizon: 0, ..c.clone() }.validate().is_err());
        assert!(Config { flexibility: -1, ..c }.validate().is_err());
        assert_eq!(Fleet::DEFAULT_AUTONOMOUS, 50);
    }

    #[test]
    fn task_ids_sort_by_order_then_leg() {
        let o = OrderId(9);
        let ids: Vec<_> = [Leg::LastMile, Leg::FirstMile, Leg::Autonomous]
            .into_iter()
            .map(|l| TaskId::new(o, l))
            .collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(
            sorted,
            vec![
                TaskId::new(o, Leg::FirstMile),
                TaskId::new(o, Leg::Autonomous),
                TaskId::new(o, Leg::LastMile)
            ]
        );
        assert!(TaskId::new(o, Leg::Direct) < TaskId::new(OrderId(10), Leg::FirstMile));
    }
}
