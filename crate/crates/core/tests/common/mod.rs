//! Random autonomous-network subproblems shared by the integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use athn::model::{Config, Leg, Location, LocationId, Matrix, Network, OrderId, Task};
use athn::{Subproblem, SubproblemKind};

pub struct Case {
    pub network: Network,
    pub config: Config,
    pub tasks: Vec<Task>,
    pub trucks: usize,
}

impl Case {
    pub fn sub(&self) -> Subproblem<'_> {
        Subproblem::new(
            SubproblemKind::AutonomousNet,
            self.tasks.clone(),
            self.trucks,
            &self.network,
            &self.config,
        )
        .unwrap()
    }
}

/// Autonomous tasks between random hubs on a 400 x 300 mile plane, picked
/// up over the first 40 hours.
pub fn random_case(seed: u64, n: usize, trucks: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hubs = rng.gen_range(3..=6);
    let pts: Vec<(f64, f64)> = (0..hubs)
        .map(|_| (rng.gen_range(0.0..400.0), rng.gen_range(0.0..300.0)))
        .collect();
    let locations = (0..hubs).map(|i| Location::hub(i, format!("H{i}"))).collect();
    let miles = Matrix::from_fn(hubs, |i, j| {
        ((pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)).round() as i64
    });
    let minutes = miles.map(|m| m * 6 / 5);
    let config = Config {
        flexibility: rng.gen_range(0..=120),
        ..Config::default()
    };
    let network = Network::from_miles(locations, miles, minutes, config.cost_per_mile).unwrap();
    let tasks = (0..n)
        .map(|k| {
            let o = rng.gen_range(0..hubs);
            let mut d = rng.gen_range(0..hubs - 1);
            if d >= o {
                d += 1;
            }
            Task::new(OrderId(k as u64), Leg::Autonomous, LocationId(o), LocationId(d), rng.gen_range(0..2400))
        })
        .collect();
    Case {
        network,
        config,
        tasks,
        trucks,
    }
}
