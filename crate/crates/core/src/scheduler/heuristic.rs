//! Greedy insertion followed by ruin-and-recreate large neighborhood search.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{canonical_routes, Prepared, Schedule, SolveError, Status};
use crate::model::{MilliDollars, Minutes, Subproblem};

/// Largest tail reordered when plain insertion finds no slot.
const REPAIR_TAIL: usize = 4;
const MAX_REMOVAL: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicOptions {
    /// Wall-clock cap. The search normally stops on `iterations` first,
    /// which keeps results reproducible for a fixed seed.
    pub time_limit: Duration,
    pub seed: u64,
    pub iterations: u64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            time_limit: Duration::from_secs(60),
            seed: 0,
            iterations: 20_000,
        }
    }
}

impl HeuristicOptions {
    pub fn new(time_limit: Duration, seed: u64) -> Self {
        HeuristicOptions {
            time_limit,
            seed,
            ..Default::default()
        }
    }

    pub fn with_iterations(mut self, iterations: u64) -> Self {
        self.iterations = iterations;
        self
    }
}

pub fn solve_heuristic(sub: &Subproblem<'_>, opts: &HeuristicOptions) -> Result<Schedule, SolveError> {
    let n = sub.tasks.len();
    if n == 0 {
        return Ok(Schedule::empty(sub, Status::Optimal));
    }
    if sub.truck_count == 0 {
        return Err(SolveError::NoTrucks(sub.kind));
    }
    let deadline = Instant::now() + opts.time_limit;
    let prep = Prepared::new(sub);
    let trucks = sub.truck_count.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (sub.tasks[i].pickup_time, sub.tasks[i].id));
    let mut current = Plan::new(trucks);
    for &t in &order {
        current.insert(&prep, t);
    }
    let mut best = current.clone();

    let max_removal = MAX_REMOVAL.min(n / 4).max(2).min(n);
    for _ in 0..opts.iterations {
        if best.key() == (0, 0) || Instant::now() >= deadline {
            break;
        }
        let q = rng.gen_range(2.min(n)..=max_removal);
        let mut candidate = current.clone();
        let removed = if rng.gen_bool(0.5) {
            candidate.remove_related(&prep, q, &mut rng)
        } else {
            candidate.remove_random(&prep, q, &mut rng)
        };
        let Some(mut removed) = removed else {
            continue;
        };
        removed.append(&mut candidate.unassigned);
        if rng.gen_bool(0.5) {
            removed.sort_by_key(|&i| (prep.lo[i], i));
        } else {
            removed.shuffle(&mut rng);
        }
        for t in removed {
            candidate.insert(&prep, t);
        }
        if candidate.key() <= current.key() {
            current = candidate;
            if current.key() < best.key() {
                best = current.clone();
            }
        }
    }

    if let Some(&t) = best.unassigned.iter().min() {
        return Err(SolveError::Infeasible {
            kind: sub.kind,
            task: sub.tasks[t].id,
        });
    }
    let mut routes = best.routes;
    canonical_routes(&prep, &mut routes, sub.truck_count);
    Ok(prep.build_schedule(sub, &routes, Status::Feasible))
}

#[derive(Clone)]
struct Plan {
    routes: Vec<Vec<usize>>,
    /// Earliest starts, parallel to `routes`.
    starts: Vec<Vec<Minutes>>,
    unassigned: Vec<usize>,
    cost: MilliDollars,
}

impl Plan {
    fn new(trucks: usize) -> Self {
        Plan {
            routes: vec![Vec::new(); trucks],
            starts: vec![Vec::new(); trucks],
            unassigned: Vec::new(),
            cost: 0,
        }
    }

    fn key(&self) -> (usize, MilliDollars) {
        (self.unassigned.len(), self.cost)
    }

    fn set_route(&mut self, prep: &Prepared, k: usize, route: Vec<usize>) {
        self.cost += prep.route_cost(&route) - prep.route_cost(&self.routes[k]);
        self.starts[k] = prep.route_starts(&route).expect("only feasible routes are stored");
        self.routes[k] = route;
    }

    /// Cheapest feasible insertion of `t`, else a reordering of some
    /// truck's tail, else leaves `t` unassigned.
    fn insert(&mut self, prep: &Prepared, t: usize) {
        if let Some((_, k, pos)) = self.best_insertion(prep, t) {
            let mut route = self.routes[k].clone();
            route.insert(pos, t);
            self.set_route(prep, k, route);
        } else if let Some((k, route)) = self.repair_tail(prep, t) {
            self.set_route(prep, k, route);
        } else {
            self.unassigned.push(t);
        }
    }

    fn best_insertion(&self, prep: &Prepared, t: usize) -> Option<(MilliDollars, usize, usize)> {
        let mut best: Option<(MilliDollars, usize, usize)> = None;
        let mut idle_seen = false;
        for (k, route) in self.routes.iter().enumerate() {
            if route.is_empty() {
                // idle trucks are interchangeable
                if !idle_seen {
                    idle_seen = true;
                    let cand = (0, k, 0);
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                }
                continue;
            }
            for pos in 0..=route.len() {
                let delta = insertion_delta(prep, route, pos, t);
                if best.is_some_and(|b| (delta, k, pos) >= b) {
                    continue;
                }
                if self.insertion_feasible(prep, k, pos, t) {
                    best = Some((delta, k, pos));
                }
            }
        }
        best
    }

    fn insertion_feasible(&self, prep: &Prepared, k: usize, pos: usize, t: usize) -> bool {
        let route = &self.routes[k];
        let starts = &self.starts[k];
        let prev = (pos > 0).then(|| (route[pos - 1], starts[pos - 1] + prep.duration[route[pos - 1]]));
        let s = prep.earliest_after(prev, t);
        if s > prep.hi[t] {
            return false;
        }
        let mut prev = (t, s + prep.duration[t]);
        for (idx, &j) in route.iter().enumerate().skip(pos) {
            let s = prep.earliest_after(Some(prev), j);
            if s > prep.hi[j] {
                return false;
            }
            if s == starts[idx] {
                // the rest of the route is unchanged
                return true;
            }
            prev = (j, s + prep.duration[j]);
        }
        true
    }

    fn repair_tail(&self, prep: &Prepared, t: usize) -> Option<(usize, Vec<usize>)> {
        let mut best: Option<(MilliDollars, usize, Vec<usize>)> = None;
        for (k, route) in self.routes.iter().enumerate() {
            if route.is_empty() {
                continue;
            }
            let keep = route.len() - route.len().min(REPAIR_TAIL);
            let mut tail: Vec<usize> = route[keep..].to_vec();
            tail.push(t);
            let old = prep.route_cost(route);
            for_each_permutation(&mut tail, &mut |perm| {
                let mut cand = route[..keep].to_vec();
                cand.extend_from_slice(perm);
                if prep.route_feasible(&cand) {
                    let delta = prep.route_cost(&cand) - old;
                    if best.as_ref().is_none_or(|(d, bk, _)| (delta, k) < (*d, *bk)) {
                        best = Some((delta, k, cand));
                    }
                }
            });
        }
        best.map(|(_, k, r)| (k, r))
    }

    fn remove_random(&mut self, prep: &Prepared, q: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let mut assigned: Vec<usize> = self.routes.iter().flatten().copied().collect();
        assigned.sort_unstable();
        assigned.shuffle(rng);
        assigned.truncate(q);
        self.remove(prep, assigned)
    }

    /// Removes a random seed task and the tasks whose endpoints and pickup
    /// times are closest to it.
    fn remove_related(&mut self, prep: &Prepared, q: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let mut assigned: Vec<usize> = self.routes.iter().flatten().copied().collect();
        if assigned.is_empty() {
            return None;
        }
        assigned.sort_unstable();
        let seed = assigned[rng.gen_range(0..assigned.len())];
        let relatedness = |i: usize| -> Minutes {
            // setup_time[a, b] runs from a's destination to b's origin
            let origins = prep.time(seed, i).min(prep.time(i, seed));
            origins + (prep.lo[seed] - prep.lo[i]).abs()
        };
        assigned.retain(|&i| i != seed);
        assigned.sort_by_key(|&i| (relatedness(i), i));
        let mut picked = vec![seed];
        while picked.len() < q && !assigned.is_empty() {
            let y: f64 = rng.gen();
            let idx = ((y.powi(4)) * assigned.len() as f64) as usize;
            picked.push(assigned.remove(idx.min(assigned.len() - 1)));
        }
        self.remove(prep, picked)
    }

    /// Takes `tasks` out of their routes. Fails when a shortened route
    /// turns infeasible, which can happen without the triangle inequality.
    fn remove(&mut self, prep: &Prepared, tasks: Vec<usize>) -> Option<Vec<usize>> {
        for k in 0..self.routes.len() {
            if !self.routes[k].iter().any(|i| tasks.contains(i)) {
                continue;
            }
            let route: Vec<usize> = self.routes[k]
                .iter()
                .copied()
                .filter(|i| !tasks.contains(i))
                .collect();
            if !prep.route_feasible(&route) {
                return None;
            }
            self.set_route(prep, k, route);
        }
        Some(tasks)
    }
}

fn insertion_delta(prep: &Prepared, route: &[usize], pos: usize, t: usize) -> MilliDollars {
    let before = (pos > 0).then(|| route[pos - 1]);
    let after = route.get(pos).copied();
    match (before, after) {
        (None, None) => 0,
        (Some(a), None) => prep.cost(a, t),
        (None, Some(b)) => prep.cost(t, b),
        (Some(a), Some(b)) => prep.cost(a, t) + prep.cost(t, b) - prep.cost(a, b),
    }
}

/// Heap's algorithm.
fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn heap(k: usize, items: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, items, f);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        heap(k - 1, items, f);
    }
    let k = items.len();
    heap(k, items, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Config, Leg, Location, LocationId, Matrix, Network, OrderId, SubproblemKind, Task};
    use crate::scheduler::testing::random_case;
    use crate::scheduler::{solve_exact, validate};

    fn opts(seed: u64) -> HeuristicOptions {
        HeuristicOptions::new(Duration::from_secs(5), seed).with_iterations(3_000)
    }

    #[test]
    fn shared_hub_pair_needs_no_relocation() {
        let locs = vec![Location::hub(0, "a"), Location::hub(1, "b")];
        let m = Matrix::from_rows(vec![vec![0, 120], vec![120, 0]]).unwrap();
        let net = Network::from_miles(locs, m.clone(), m, 2000).unwrap();
        let config = Config::default();
        let tasks: Vec<Task> = (0..12)
            .map(|k| Task::new(OrderId(k), Leg::Autonomous, LocationId(0), LocationId(1), k as i64 * 37))
            .collect();
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 12, &net, &config).unwrap();
        let s = solve_heuristic(&sub, &opts(1)).unwrap();
        assert_eq!(s.empty_cost, 0);
        assert!(validate(&s, &sub).is_empty());
    }

    #[test]
    fn infeasible_names_blocking_task() {
        let locs = vec![Location::hub(0, "a"), Location::hub(1, "b")];
        let m = Matrix::from_rows(vec![vec![0, 120], vec![120, 0]]).unwrap();
        let net = Network::from_miles(locs, m.clone(), m, 2000).unwrap();
        let config = Config { flexibility: 0, ..Config::default() };
        let tasks = vec![
            Task::new(OrderId(0), Leg::Autonomous, LocationId(0), LocationId(1), 0),
            Task::new(OrderId(1), Leg::Autonomous, LocationId(0), LocationId(1), 10),
        ];
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, tasks, 1, &net, &config).unwrap();
        let err = solve_heuristic(&sub, &opts(0)).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible { .. }));
    }

    #[test]
    fn never_beats_exact_and_stays_valid() {
        let mut gaps = Vec::new();
        for seed in 0..60 {
            let n = 2 + (seed as usize % 6);
            let trucks = 1 + (seed as usize % 3);
            let case = random_case(seed, n, trucks, 5, 3000);
            let sub = Subproblem::new(SubproblemKind::AutonomousNet, case.tasks.clone(), trucks, &case.network, &case.config).unwrap();
            let exact = solve_exact(&sub, Duration::from_secs(10)).unwrap();
            if !exact.is_solved() {
                continue;
            }
            let h = solve_heuristic(&sub, &opts(seed)).expect("exact found a schedule");
            assert!(validate(&h, &sub).is_empty());
            assert!(h.empty_cost >= exact.empty_cost);
            gaps.push((h.empty_cost - exact.empty_cost) as f64 / exact.empty_cost.max(1) as f64);
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!(mean < 0.05, "mean gap {mean}");
    }

    #[test]
    fn same_seed_same_schedule() {
        let case = random_case(5, 40, 6, 8, 4000);
        let sub = Subproblem::new(SubproblemKind::AutonomousNet, case.tasks.clone(), 6, &case.network, &case.config).unwrap();
        let a = solve_heuristic(&sub, &opts(9));
        let b = solve_heuristic(&sub, &opts(9));
        assert_eq!(a, b);
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut items = vec![0, 1, 2, 3];
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&mut items, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }
}
