//! Seeded synthetic instances standing in for proprietary order data.
//!
//! Customers and highway access candidates are scattered uniformly over a
//! rectangular region. Candidate access frequency counts the customers
//! nearby, and hubs are placed greedily over those counts. Road miles are
//! Euclidean distance times a detour factor chosen so that the mean order
//! trip hits a target length.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{place_hubs, AccessPointHistogram, DEFAULT_MIN_SEPARATION};
use crate::instance::InstanceFile;
use crate::model::{Config, Fleet, HubAssignment, Location, LocationId, Matrix, Miles, Minutes, Network, Order, DEFAULT_HORIZON};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("region too small: placed {placed} of {wanted} hubs at the required separation")]
    RegionTooSmall { placed: usize, wanted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub hub_count: usize,
    pub order_count: usize,
    pub customer_count: usize,
    /// Width and height in miles.
    pub region: (f64, f64),
    pub horizon: Minutes,
    pub seed: u64,
    pub target_trip_miles: f64,
    pub speed_mph: f64,
    pub min_separation: Miles,
    /// Candidates counted per hub wanted.
    pub candidates_per_hub: usize,
    pub autonomous_trucks: usize,
    /// Regular trucks per hub. `None` gives each hub one truck per order
    /// touching its customers, so local work is never short of trucks.
    pub hub_trucks: Option<usize>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            hub_count: 17,
            order_count: 494,
            customer_count: 200,
            region: (600.0, 400.0),
            horizon: DEFAULT_HORIZON,
            seed: 0,
            target_trip_miles: 431.0,
            speed_mph: 50.0,
            min_separation: DEFAULT_MIN_SEPARATION,
            candidates_per_hub: 8,
            autonomous_trucks: Fleet::DEFAULT_AUTONOMOUS,
            hub_trucks: None,
        }
    }
}

impl SyntheticSpec {
    pub fn small(seed: u64) -> Self {
        SyntheticSpec {
            seed,
            ..Self::default()
        }
    }

    pub fn large(seed: u64) -> Self {
        SyntheticSpec {
            hub_count: 30,
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::InvalidSpec(m.into()));
        if self.hub_count == 0 || self.order_count == 0 {
            return bad("hub and order counts must be at least 1");
        }
        if self.customer_count < 2 {
            return bad("need at least two customers");
        }
        if !(self.region.0 > 0.0 && self.region.1 > 0.0) {
            return bad("region must have positive extent");
        }
        if self.horizon <= 0 {
            return bad("horizon must be positive");
        }
        if !(self.target_trip_miles > 0.0 && self.speed_mph > 0.0) {
            return bad("trip length and speed must be positive");
        }
        if self.candidates_per_hub == 0 {
            return bad("candidates_per_hub must be at least 1");
        }
        Ok(())
    }
}

/// Relative pickup volume per weekday, Monday first.
const WEEKDAY_WEIGHTS: [f64; 7] = [1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 0.2];

pub fn generate_instance(spec: &SyntheticSpec) -> Result<InstanceFile, GenerationError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let point = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..spec.region.0), rng.gen_range(0.0..spec.region.1));
    let customers: Vec<(f64, f64)> = (0..spec.customer_count).map(|_| point(&mut rng)).collect();
    let candidates: Vec<(f64, f64)> = (0..spec.hub_count * spec.candidates_per_hub)
        .map(|_| point(&mut rng))
        .collect();
    let euclid = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);

    let mut pairs = Vec::with_capacity(spec.order_count);
    for _ in 0..spec.order_count {
        let o = rng.gen_range(0..spec.customer_count);
        let mut d = rng.gen_range(0..spec.customer_count - 1);
        if d >= o {
            d += 1;
        }
        pairs.push((o, d));
    }
    let mean = pairs.iter().map(|&(o, d)| euclid(customers[o], customers[d])).sum::<f64>() / pairs.len() as f64;
    let detour = if mean > 0.0 { spec.target_trip_miles / mean } else { 1.0 };
    let road = |a, b| (euclid(a, b) * detour).round() as Miles;

    // access frequency: customers within reach of each candidate
    let reach = 0.15 * spec.region.0.max(spec.region.1);
    let counts = candidates
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let near = customers.iter().filter(|&&p| euclid(p, c) <= reach).count() as u64;
            (LocationId(i), near)
        })
        .collect();
    let hist = AccessPointHistogram { counts };
    let cand_miles = Matrix::from_fn(candidates.len(), |i, j| road(candidates[i], candidates[j]));
    let chosen = place_hubs(&hist, spec.hub_count, spec.min_separation, &cand_miles);
    if chosen.len() < spec.hub_count {
        return Err(GenerationError::RegionTooSmall {
            placed: chosen.len(),
            wanted: spec.hub_count,
        });
    }

    let k = spec.hub_count;
    let points: Vec<(f64, f64)> = chosen.iter().map(|h| candidates[h.0]).chain(customers.iter().copied()).collect();
    let locations: Vec<Location> = points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let base = if i < k {
                Location::hub(i, format!("H{i}"))
            } else {
                Location::customer(i, format!("C{}", i - k))
            };
            Location {
                position: Some(p),
                ..base
            }
        })
        .collect();
    let miles = Matrix::from_fn(points.len(), |i, j| road(points[i], points[j]));
    let minutes = miles.map(|m| (m as f64 * 60.0 / spec.speed_mph).round() as Minutes);
    let config = Config {
        horizon: spec.horizon,
        ..Config::default()
    };
    let network = Network::from_miles(locations, miles, minutes, config.cost_per_mile)
        .expect("generated matrices are square with zero diagonal");

    let days = ((spec.horizon + 1439) / 1440) as usize;
    let weights: Vec<f64> = (0..days).map(|d| WEEKDAY_WEIGHTS[d % 7]).collect();
    let day_dist = WeightedIndex::new(&weights).expect("positive weights");
    let orders: Vec<Order> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(o, d))| {
            let day = day_dist.sample(&mut rng) as Minutes;
            let minute = rng.gen_range(0..1440);
            let pickup = (day * 1440 + minute).min(spec.horizon - 1);
            Order::new(i as u64 + 1, k + o, k + d, pickup)
        })
        .collect();

    let hub_of = HubAssignment::nearest(&network).expect("at least one hub");
    let mut touching = vec![0usize; k];
    for o in &orders {
        for c in [o.origin, o.destination] {
            touching[hub_of.require(c).expect("customers have hubs").0] += 1;
        }
    }
    let fleet = (0..k).fold(Fleet::new(spec.autonomous_trucks), |f, h| {
        f.with_hub(LocationId(h), spec.hub_trucks.unwrap_or(touching[h]))
    });
    Ok(InstanceFile::new(config, fleet, network, orders))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_instance(&SyntheticSpec::small(11)).unwrap().to_json();
        let b = generate_instance(&SyntheticSpec::small(11)).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate_instance(&SyntheticSpec::small(12)).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn base_case_shape() {
        let inst = generate_instance(&SyntheticSpec::small(1)).unwrap();
        assert_eq!(inst.orders.len(), 494);
        assert_eq!(inst.network.hubs().count(), 17);
        assert_eq!(inst.fleet.autonomous_count, 50);
        inst.validate().unwrap();
        let mean = inst
            .orders
            .iter()
            .map(|o| inst.network.miles(o.origin, o.destination) as f64)
            .sum::<f64>()
            / 494.0;
        assert!((mean - 431.0).abs() < 1.0, "mean trip {mean}");
    }

    #[test]
    fn hubs_are_separated() {
        let inst = generate_instance(&SyntheticSpec::large(2)).unwrap();
        let hubs: Vec<LocationId> = inst.network.hubs().collect();
        assert_eq!(hubs.len(), 30);
        for (i, &a) in hubs.iter().enumerate() {
            for &b in &hubs[i + 1..] {
                assert!(inst.network.miles(a, b) >= 50);
            }
        }
    }

    #[test]
    fn triangle_inequality_within_rounding() {
        let spec = SyntheticSpec {
            customer_count: 60,
            order_count: 50,
            ..SyntheticSpec::small(4)
        };
        let inst = generate_instance(&spec).unwrap();
        let m = inst.network.miles_matrix();
        let n = m.size();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!(m.get(i, k) <= m.get(i, j) + m.get(j, k) + 1, "{i} {j} {k}");
                }
            }
        }
    }

    #[test]
    fn weekends_are_quieter() {
        let inst = generate_instance(&SyntheticSpec::small(3)).unwrap();
        let mut per_day = [0usize; 7];
        for o in &inst.orders {
            per_day[(o.pickup_time / 1440) as usize] += 1;
        }
        assert!(per_day[5] + per_day[6] < per_day[0] + per_day[1]);
    }

    #[test]
    fn too_small_region() {
        let spec = SyntheticSpec {
            region: (30.0, 30.0),
            target_trip_miles: 20.0,
            ..SyntheticSpec::small(0)
        };
        assert!(matches!(generate_instance(&spec), Err(GenerationError::RegionTooSmall { .. })));
        let spec = SyntheticSpec {
            order_count: 0,
            ..SyntheticSpec::small(0)
        };
        assert!(matches!(generate_instance(&spec), Err(GenerationError::InvalidSpec(_))));
    }
}
