use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Schedule;
use crate::model::{Leg, Minutes, OrderId, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RechainedPickup {
    pub order: OrderId,
    pub nominal: Minutes,
    pub updated: Minutes,
}

impl RechainedPickup {
    pub fn shift(&self) -> Minutes {
        self.updated - self.nominal
    }
}

/// Moves each last-mile pickup to the time its autonomous leg actually
/// finishes in `autonomous`. First-mile pickups are upstream of the
/// autonomous leg and stay as they are. Orders whose autonomous leg is not
/// in the schedule are left untouched.
pub fn rechain_downstream(autonomous: &Schedule, tasks: &mut [Task]) -> Vec<RechainedPickup> {
    let mut finish: BTreeMap<OrderId, Minutes> = BTreeMap::new();
    let legs: BTreeMap<_, _> = tasks
        .iter()
        .filter(|t| t.leg == Leg::Autonomous)
        .map(|t| (t.id, t.order_id))
        .collect();
    for a in &autonomous.assignments {
        if let Some(&order) = legs.get(&a.task_id) {
            finish.insert(order, a.end);
        }
    }
    let mut out = Vec::new();
    for t in tasks.iter_mut().filter(|t| t.leg == Leg::LastMile) {
        if let Some(&end) = finish.get(&t.order_id) {
            out.push(RechainedPickup {
                order: t.order_id,
                nominal: t.pickup_time,
                updated: end,
            });
            t.pickup_time = end;
        }
    }
    out.sort_by_key(|r| r.order);
    out
}
