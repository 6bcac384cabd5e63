//! Stop-record order data, loaded/empty leg attribution, travel matrices
//! and hub placement from highway access frequencies.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{FileError, InstanceFile};
use crate::model::{
    Config, Fleet, Location, LocationId, Matrix, Miles, Minutes, ModelError, Network, Order, OrderId,
};

const TIMESTAMP_FORMAT: &str = "%d-%m-%Y %H:%M";
const TIMESTAMP_WRITE_FORMAT: &str = "%-d-%-m-%Y %H:%M";

pub const STOP_COLUMNS: [&str; 9] = [
    "StopNum",
    "OrderNum",
    "StopArrivalDate",
    "StopDepartureDate",
    "Stop",
    "City",
    "ZipCode",
    "Status",
    "Event",
];

pub const DEFAULT_MIN_SEPARATION: Miles = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("order {order}: {reason}")]
    MalformedOrder { order: u64, reason: String },
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("no travel data from {0} to {1}")]
    MissingPair(String, String),
    #[error("{0}")]
    Csv(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] FileError),
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopRecord {
    pub stop_number: u64,
    pub order_number: u64,
    pub arrival: NaiveDateTime,
    pub departure: NaiveDateTime,
    /// 1-based position within the order.
    pub stop_seq: u32,
    pub city: String,
    pub zip: String,
    /// Vehicle status on arrival; `None` when the data says NaN or nothing.
    pub status: Option<String>,
    pub event: String,
}

impl StopRecord {
    /// Key used to match stops against matrix and histogram locations.
    pub fn location_key(&self) -> &str {
        if self.zip.is_empty() {
            &self.city
        } else {
            &self.zip
        }
    }
}

fn column_positions(headers: &csv::StringRecord, names: &[&str]) -> Result<Vec<usize>, IngestError> {
    names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        })
        .collect()
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// Parses stop records and returns them grouped by order number and sorted
/// by stop sequence. Row numbers in errors count the header as row 1.
pub fn parse_stop_records(text: &str) -> Result<Vec<StopRecord>, IngestError> {
    let mut rdr = reader(text);
    let cols = column_positions(rdr.headers()?, &STOP_COLUMNS)?;
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 2;
        let row = row?;
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let bad = |what: &str, value: &str| IngestError::Row {
            row: row_no,
            message: format!("bad {what} {value:?}"),
        };
        let int = |k: usize| field(k).parse::<u64>().map_err(|_| bad(STOP_COLUMNS[k], field(k)));
        let time = |k: usize| {
            NaiveDateTime::parse_from_str(field(k), TIMESTAMP_FORMAT).map_err(|_| bad(STOP_COLUMNS[k], field(k)))
        };
        let arrival = time(2)?;
        let departure = time(3)?;
        if departure < arrival {
            return Err(IngestError::Row {
                row: row_no,
                message: "departure before arrival".into(),
            });
        }
        let status = match field(7) {
            "" | "NaN" | "nan" => None,
            s => Some(s.to_string()),
        };
        records.push(StopRecord {
            stop_number: int(0)?,
            order_number: int(1)?,
            arrival,
            departure,
            stop_seq: u32::try_from(int(4)?).map_err(|_| bad("Stop", field(4)))?,
            city: field(5).to_string(),
            zip: field(6).to_string(),
            status,
            event: field(8).to_string(),
        });
    }
    records.sort_by_key(|r| (r.order_number, r.stop_seq));
    for group in records.chunk_by(|a, b| a.order_number == b.order_number) {
        for (i, r) in group.iter().enumerate() {
            if r.stop_seq as usize != i + 1 {
                return Err(IngestError::MalformedOrder {
                    order: r.order_number,
                    reason: format!("stop sequence is not 1..{}", group.len()),
                });
            }
        }
    }
    Ok(records)
}

pub fn write_stop_records(records: &[StopRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STOP_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record([
            r.stop_number.to_string(),
            r.order_number.to_string(),
            r.arrival.format(TIMESTAMP_WRITE_FORMAT).to_string(),
            r.departure.format(TIMESTAMP_WRITE_FORMAT).to_string(),
            r.stop_seq.to_string(),
            r.city.clone(),
            r.zip.clone(),
            r.status.clone().unwrap_or_else(|| "NaN".into()),
            r.event.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// How status and event codes translate into loaded or empty movement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMap {
    pub loaded_status: BTreeSet<String>,
    pub empty_status: BTreeSet<String>,
    /// Events that imply the truck arrived loaded.
    pub loaded_events: BTreeSet<String>,
    /// Events that imply the truck arrived empty.
    pub empty_events: BTreeSet<String>,
    /// Events that count as a delivery for the return-trip correction.
    pub delivery_events: BTreeSet<String>,
}

impl Default for CodeMap {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        CodeMap {
            loaded_status: set(&["LD"]),
            empty_status: set(&["MT"]),
            loaded_events: set(&["LLD", "LUL", "HPL"]),
            empty_events: set(&["DMT"]),
            delivery_events: set(&["LUL"]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegLoad {
    Loaded,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopLeg {
    pub from_seq: u32,
    pub to_seq: u32,
    pub from: LocationId,
    pub to: LocationId,
    pub load: LegLoad,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedOrder {
    pub order: Order,
    pub legs: Vec<StopLeg>,
    /// A single delivery followed by an empty return to the origin.
    pub challenging: bool,
    pub warnings: Vec<String>,
}

impl DerivedOrder {
    pub fn loaded_legs(&self) -> impl Iterator<Item = &StopLeg> {
        self.legs.iter().filter(|l| l.load == LegLoad::Loaded)
    }

    pub fn empty_legs(&self) -> impl Iterator<Item = &StopLeg> {
        self.legs.iter().filter(|l| l.load == LegLoad::Empty)
    }
}

/// Location keys mapped to dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocationIndex {
    ids: BTreeMap<String, LocationId>,
    keys: Vec<String>,
}

impl LocationIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys<'a>(keys: impl IntoIterator<Item = &'a str>) -> Self {
        let mut index = Self::new();
        for k in keys {
            index.insert(k);
        }
        index
    }

    pub fn insert(&mut self, key: &str) -> LocationId {
        if let Some(&id) = self.ids.get(key) {
            return id;
        }
        let id = LocationId(self.keys.len());
        self.ids.insert(key.to_string(), id);
        self.keys.push(key.to_string());
        id
    }

    pub fn get(&self, key: &str) -> Option<LocationId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: LocationId) -> Option<&str> {
        self.keys.get(id.0).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }
}

fn arrival_load(stop: &StopRecord, codes: &CodeMap, warnings: &mut Vec<String>) -> LegLoad {
    if let Some(status) = &stop.status {
        if codes.loaded_status.contains(status) {
            return LegLoad::Loaded;
        }
        if codes.empty_status.contains(status) {
            return LegLoad::Empty;
        }
        warnings.push(format!("stop {}: unknown status code {status:?}", stop.stop_number));
    }
    if codes.empty_events.contains(&stop.event) {
        return LegLoad::Empty;
    }
    if !codes.loaded_events.contains(&stop.event) {
        warnings.push(format!(
            "stop {}: cannot tell load from event {:?}, counted as loaded",
            stop.stop_number, stop.event
        ));
    }
    LegLoad::Loaded
}

/// Turns each order's stop sequence into legs between consecutive stops.
/// Locations are resolved through `index`, which grows as new keys appear.
/// Pickup times are minutes from the earliest first-stop arrival.
pub fn derive_orders(
    records: &[StopRecord],
    codes: &CodeMap,
    index: &mut LocationIndex,
) -> Result<Vec<DerivedOrder>, IngestError> {
    let groups: Vec<&[StopRecord]> = records.chunk_by(|a, b| a.order_number == b.order_number).collect();
    let Some(epoch) = groups.iter().map(|g| g[0].arrival).min() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(groups.len());
    for stops in groups {
        let order_number = stops[0].order_number;
        let malformed = |reason: &str| IngestError::MalformedOrder {
            order: order_number,
            reason: reason.into(),
        };
        if stops.len() < 2 {
            return Err(malformed("fewer than two stops"));
        }
        let ids: Vec<LocationId> = stops.iter().map(|s| index.insert(s.location_key())).collect();
        let mut warnings = Vec::new();
        let mut legs: Vec<StopLeg> = stops
            .windows(2)
            .zip(ids.windows(2))
            .map(|(pair, loc)| StopLeg {
                from_seq: pair[0].stop_seq,
                to_seq: pair[1].stop_seq,
                from: loc[0],
                to: loc[1],
                load: arrival_load(&pair[1], codes, &mut warnings),
            })
            .collect();

        // back at the start after nothing but deliveries: the return is empty
        let last = stops.len() - 1;
        let only_deliveries = stops[1..last].iter().all(|s| codes.delivery_events.contains(&s.event));
        if ids[last] == ids[0] && only_deliveries && !codes.delivery_events.contains(&stops[last].event) {
            let leg = legs.last_mut().expect("at least one leg");
            if leg.load == LegLoad::Loaded {
                warnings.push(format!("order {order_number}: return trip corrected to empty"));
                leg.load = LegLoad::Empty;
            }
        }

        let origin = ids[0];
        let destination = *ids
            .iter()
            .find(|&&id| id != origin)
            .ok_or_else(|| malformed("all stops at one location"))?;
        let challenging = legs.len() == 2
            && legs[0].load == LegLoad::Loaded
            && legs[1].load == LegLoad::Empty
            && ids[2] == origin;
        let pickup: Minutes = (stops[0].arrival - epoch).num_minutes();
        out.push(DerivedOrder {
            order: Order {
                id: OrderId(order_number),
                origin,
                destination,
                pickup_time: pickup,
            },
            legs,
            challenging,
            warnings,
        });
    }
    Ok(out)
}

/// Highway entry/exit frequency per candidate location.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessPointHistogram {
    pub counts: BTreeMap<LocationId, u64>,
}

/// Reads `location,count` rows, resolving locations through `index`.
pub fn parse_histogram(text: &str, index: &LocationIndex) -> Result<AccessPointHistogram, IngestError> {
    let mut rdr = reader(text);
    let cols = column_positions(rdr.headers()?, &["location", "count"])?;
    let mut counts = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let key = row.get(cols[0]).unwrap_or("");
        let id = index.get(key).ok_or_else(|| IngestError::UnknownLocation(key.into()))?;
        let count = row.get(cols[1]).unwrap_or("").parse::<u64>().map_err(|_| IngestError::Row {
            row: i + 2,
            message: "bad count".into(),
        })?;
        *counts.entry(id).or_insert(0) += count;
    }
    Ok(AccessPointHistogram { counts })
}

/// Greedy hub placement: candidates by decreasing frequency (ties by lowest
/// id), each accepted only if at least `min_separation` miles away from every
/// hub already chosen, in both directions. May return fewer than `k`.
pub fn place_hubs(hist: &AccessPointHistogram, k: usize, min_separation: Miles, distance: &Matrix) -> Vec<LocationId> {
    let mut candidates: Vec<(LocationId, u64)> = hist.counts.iter().map(|(&id, &c)| (id, c)).collect();
    candidates.sort_by_key(|&(id, c)| (std::cmp::Reverse(c), id));
    let mut chosen: Vec<LocationId> = Vec::new();
    for (id, _) in candidates {
        if chosen.len() == k {
            break;
        }
        let far = chosen
            .iter()
            .all(|h| distance.get(h.0, id.0) >= min_separation && distance.get(id.0, h.0) >= min_separation);
        if far {
            chosen.push(id);
        }
    }
    chosen
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixEntry {
    pub from: String,
    pub to: String,
    pub miles: Miles,
    pub minutes: Minutes,
}

/// Reads `location,location,miles,minutes` rows (header required).
pub fn parse_matrix_csv(text: &str) -> Result<Vec<MatrixEntry>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    rdr.headers()?;
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let num = |k: usize| {
            row.get(k).unwrap_or("").parse::<i64>().map_err(|_| IngestError::Row {
                row: i + 2,
                message: format!("bad number in column {}", k + 1),
            })
        };
        if row.len() < 4 {
            return Err(IngestError::Row {
                row: i + 2,
                message: "expected 4 columns".into(),
            });
        }
        out.push(MatrixEntry {
            from: row[0].to_string(),
            to: row[1].to_string(),
            miles: num(2)?,
            minutes: num(3)?,
        });
    }
    Ok(out)
}

/// Square miles and minutes matrices over `index`; every ordered pair of
/// distinct locations must be present.
pub fn matrices_from_entries(entries: &[MatrixEntry], index: &LocationIndex) -> Result<(Matrix, Matrix), IngestError> {
    let n = index.len();
    let mut miles = Matrix::zeros(n);
    let mut minutes = Matrix::zeros(n);
    let mut seen = vec![false; n * n];
    for e in entries {
        let a = index.get(&e.from).ok_or_else(|| IngestError::UnknownLocation(e.from.clone()))?;
        let b = index.get(&e.to).ok_or_else(|| IngestError::UnknownLocation(e.to.clone()))?;
        miles.set(a.0, b.0, e.miles);
        minutes.set(a.0, b.0, e.minutes);
        seen[a.0 * n + b.0] = true;
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !seen[i * n + j] {
                return Err(IngestError::MissingPair(index.keys[i].clone(), index.keys[j].clone()));
            }
        }
    }
    Ok((miles, minutes))
}

/// Network with every indexed location as a customer site plus one hub per
/// entry of `hubs`, placed at that site. Hub `i` gets id `index.len() + i`
/// and label `H:<key>`.
pub fn network_with_hubs(
    index: &LocationIndex,
    miles: &Matrix,
    minutes: &Matrix,
    hubs: &[LocationId],
    cost_per_mile: i64,
) -> Result<Network, IngestError> {
    let n = index.len();
    let site = |i: usize| if i < n { i } else { hubs[i - n].0 };
    let total = n + hubs.len();
    let mut locations: Vec<Location> = index.keys.iter().enumerate().map(|(i, k)| Location::customer(i, k.clone())).collect();
    for (i, h) in hubs.iter().enumerate() {
        let key = index.key(*h).ok_or_else(|| IngestError::UnknownLocation(h.to_string()))?;
        locations.push(Location::hub(n + i, format!("H:{key}")));
    }
    let expand = |m: &Matrix| Matrix::from_fn(total, |i, j| if i == j { 0 } else { m.get(site(i), site(j)) });
    Ok(Network::from_miles(locations, expand(miles), expand(minutes), cost_per_mile)?)
}

/// Everything needed to turn raw order data into an instance.
#[derive(Debug, Clone)]
pub struct IngestSettings {
    pub codes: CodeMap,
    pub hub_count: usize,
    pub min_separation: Miles,
    pub config: Config,
    pub autonomous_trucks: usize,
    pub hub_trucks: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub orders: usize,
    pub challenging: usize,
    pub hubs_placed: usize,
    pub outside_horizon: usize,
    pub warnings: Vec<String>,
}

/// Builds an instance holding the challenging orders of a stop-record file.
/// Locations are the keys of the matrix file, sorted; hubs are placed over
/// the access histogram and appended after them.
pub fn ingest_instance(
    stops: &str,
    matrix: &str,
    access: &str,
    settings: &IngestSettings,
) -> Result<(InstanceFile, IngestSummary), IngestError> {
    let records = parse_stop_records(stops)?;
    let entries = parse_matrix_csv(matrix)?;
    let keys: BTreeSet<&str> = entries.iter().flat_map(|e| [e.from.as_str(), e.to.as_str()]).collect();
    let index = LocationIndex::from_keys(keys);
    let mut grown = index.clone();
    let derived = derive_orders(&records, &settings.codes, &mut grown)?;
    if let Some(extra) = grown.keys().get(index.len()) {
        return Err(IngestError::UnknownLocation(extra.clone()));
    }
    let hist = parse_histogram(access, &index)?;
    let (miles, minutes) = matrices_from_entries(&entries, &index)?;
    let hubs = place_hubs(&hist, settings.hub_count, settings.min_separation, &miles);
    let network = network_with_hubs(&index, &miles, &minutes, &hubs, settings.config.cost_per_mile)?;

    let mut summary = IngestSummary {
        orders: derived.len(),
        hubs_placed: hubs.len(),
        ..Default::default()
    };
    let mut orders = Vec::new();
    for d in derived {
        summary.warnings.extend(d.warnings);
        if !d.challenging {
            continue;
        }
        summary.challenging += 1;
        if d.order.pickup_time >= settings.config.horizon {
            summary.outside_horizon += 1;
            continue;
        }
        orders.push(d.order);
    }
    let fleet = (0..hubs.len()).fold(Fleet::new(settings.autonomous_trucks), |f, i| {
        f.with_hub(LocationId(index.len() + i), settings.hub_trucks)
    });
    let instance = InstanceFile::new(settings.config.clone(), fleet, network, orders);
    instance.validate()?;
    Ok((instance, summary))
}
