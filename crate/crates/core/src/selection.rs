//! Direct trip or hub network, decided per order on arc costs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Config, Fraction, HubAssignment, MilliDollars, ModelError, Network, Order, OrderId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    Athn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeDecision {
    pub order_id: OrderId,
    pub mode: Mode,
    /// Loaded trip plus the empty return.
    pub direct_cost: MilliDollars,
    /// First mile, discounted autonomous leg and last mile, rounded half-up.
    pub athn_cost: MilliDollars,
    /// Origin and destination share a hub, so there is no autonomous leg.
    pub same_hub: bool,
}

/// Compares a conventional round trip against first mile + autonomous leg +
/// last mile for a single-delivery order. Ties go to the direct trip.
pub fn select_mode(
    order: &Order,
    network: &Network,
    hub_of: &HubAssignment,
    config: &Config,
) -> Result<ModeDecision, ModelError> {
    let origin_hub = hub_of.require(order.origin)?;
    let destination_hub = hub_of.require(order.destination)?;
    let direct_cost =
        network.cost(order.origin, order.destination) + network.cost(order.destination, order.origin);
    let local = network.cost(order.origin, origin_hub) + network.cost(destination_hub, order.destination);
    let highway = network.cost(origin_hub, destination_hub);

    // everything scaled by 10^4 so the discount stays exact
    let one = Fraction::ONE_BP as i128;
    let athn_scaled = local as i128 * one + highway as i128 * config.alpha.complement_bp() as i128;
    let direct_scaled = direct_cost as i128 * one;
    let athn_cost = ((athn_scaled + one / 2) / one) as MilliDollars;

    let same_hub = origin_hub == destination_hub;
    let mode = if !same_hub && athn_scaled < direct_scaled {
        Mode::Athn
    } else {
        Mode::Direct
    };
    Ok(ModeDecision {
        order_id: order.id,
        mode,
        direct_cost,
        athn_cost,
        same_hub,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub athn_orders: usize,
    pub direct_orders: usize,
    /// Cost of the chosen mode, summed per mode.
    pub athn_cost: MilliDollars,
    pub direct_cost: MilliDollars,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub athn: Vec<Order>,
    pub direct: Vec<Order>,
    /// One per order, sorted by order id.
    pub decisions: Vec<ModeDecision>,
    pub summary: SelectionSummary,
}

pub fn select_all(
    orders: &[Order],
    network: &Network,
    hub_of: &HubAssignment,
    config: &Config,
) -> Result<Selection, ModelError> {
    let mut decided: Vec<(Order, ModeDecision)> = orders
        .par_iter()
        .map(|o| select_mode(o, network, hub_of, config).map(|d| (o.clone(), d)))
        .collect::<Result<_, _>>()?;
    decided.sort_by_key(|(o, _)| o.id);

    let mut out = Selection::default();
    for (order, decision) in decided {
        match decision.mode {
            Mode::Athn => {
                out.summary.athn_orders += 1;
                out.summary.athn_cost += decision.athn_cost;
                out.athn.push(order);
            }
            Mode::Direct => {
                out.summary.direct_orders += 1;
                out.summary.direct_cost += decision.direct_cost;
                out.direct.push(order);
            }
        }
        out.decisions.push(decision);
    }
    Ok(out)
}
