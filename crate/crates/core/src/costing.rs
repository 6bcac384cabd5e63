//! Cost tables comparing the current direct-trip network with the hub
//! network, and scenario sweeps over α and Δ.
//!
//! Money is carried in milli-dollars as `f64` because the first/last-mile
//! empty estimate and the α adjustment produce fractional values. Rounding
//! happens only when a table is displayed.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceFile;
use crate::model::{Config, Fraction, Minutes};
use crate::pipeline::{run_pipeline, PipelineError, PipelineOptions, PipelineReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("first/last-mile empty ratio must be below 1, got {0}")]
    EmptyRatio(f64),
    #[error("alpha must be below 1, got {0}")]
    Alpha(f64),
    #[error("{0} mileage must be finite and nonnegative")]
    Mileage(&'static str),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Mileage {
    pub loaded: f64,
    pub empty: f64,
}

impl Mileage {
    pub fn new(loaded: f64, empty: f64) -> Self {
        Mileage { loaded, empty }
    }

    pub fn total(&self) -> f64 {
        self.loaded + self.empty
    }

    fn check(&self, what: &'static str) -> Result<(), CostError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.loaded) && ok(self.empty) {
            Ok(())
        } else {
            Err(CostError::Mileage(what))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostLine {
    pub miles: f64,
    /// Share of the block total, 0 when the block is empty.
    pub pct_of_total: f64,
    /// At the human-driven rate, in milli-dollars.
    pub cost_without_autonomy: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBlock {
    pub label: String,
    pub adjustment: f64,
    pub loaded: CostLine,
    pub empty: CostLine,
    pub total: CostLine,
}

impl CostBlock {
    fn new(label: &str, miles: Mileage, cost_per_mile: f64, adjustment: f64) -> Self {
        let total = miles.total();
        let line = |m: f64| CostLine {
            miles: m,
            pct_of_total: if total > 0.0 { 100.0 * m / total } else { 0.0 },
            cost_without_autonomy: m * cost_per_mile,
            cost: m * cost_per_mile * adjustment,
        };
        CostBlock {
            label: label.to_string(),
            adjustment,
            loaded: line(miles.loaded),
            empty: line(miles.empty),
            total: line(total),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub current: CostBlock,
    pub autonomous: CostBlock,
    pub first_last: CostBlock,
    pub athn_miles: f64,
    pub athn_cost_without_autonomy: f64,
    pub athn_cost: f64,
    pub savings_miles: f64,
    pub savings_miles_pct: f64,
    pub savings_without_autonomy: f64,
    pub savings_dollars: f64,
    pub savings_pct: f64,
}

/// Builds the cost table. First/last-mile empty miles are estimated as
/// `fl_loaded * e / (1 - e)` so that they make up a share `e` of the
/// first/last-mile total.
pub fn build_cost_table(
    current: Mileage,
    autonomous: Mileage,
    fl_loaded: f64,
    config: &Config,
) -> Result<CostTable, CostError> {
    let e = config.first_last_empty_ratio;
    if e.bp() >= Fraction::ONE_BP {
        return Err(CostError::EmptyRatio(e.as_f64()));
    }
    if config.alpha.bp() >= Fraction::ONE_BP {
        return Err(CostError::Alpha(config.alpha.as_f64()));
    }
    current.check("current")?;
    autonomous.check("autonomous")?;
    Mileage::new(fl_loaded, 0.0).check("first/last-mile")?;

    let fl_empty = fl_loaded * e.bp() as f64 / e.complement_bp() as f64;
    let rate = config.cost_per_mile as f64;
    let current = CostBlock::new("Current network", current, rate, 1.0);
    let autonomous = CostBlock::new("Autonomous", autonomous, rate, 1.0 - config.alpha.as_f64());
    let first_last = CostBlock::new("First/last mile", Mileage::new(fl_loaded, fl_empty), rate, 1.0);

    let athn_miles = autonomous.total.miles + first_last.total.miles;
    let athn_cost_without_autonomy =
        autonomous.total.cost_without_autonomy + first_last.total.cost_without_autonomy;
    let athn_cost = autonomous.total.cost + first_last.total.cost;
    let pct = |part: f64, whole: f64| if whole > 0.0 { 100.0 * part / whole } else { 0.0 };
    let savings_miles = current.total.miles - athn_miles;
    let savings_dollars = current.total.cost - athn_cost;
    Ok(CostTable {
        savings_miles,
        savings_miles_pct: pct(savings_miles, current.total.miles),
        savings_without_autonomy: current.total.cost_without_autonomy - athn_cost_without_autonomy,
        savings_dollars,
        savings_pct: pct(savings_dollars, current.total.cost),
        current,
        autonomous,
        first_last,
        athn_miles,
        athn_cost_without_autonomy,
        athn_cost,
    })
}

/// Half-up rounding to a whole number.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Milli-dollars to whole dollars, half-up.
pub fn dollars(milli: f64) -> i64 {
    round_half_up(milli / 1000.0)
}

fn thousands(v: i64) -> String {
    let digits = v.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    if v < 0 {
        format!("-{out}")
    } else {
        out
    }
}

impl CostTable {
    fn rows(&self) -> Vec<[String; 7]> {
        let mut rows = Vec::new();
        for (group, block) in [
            ("Current network", &self.current),
            ("Autonomous", &self.autonomous),
            ("First/last mile", &self.first_last),
        ] {
            for (kind, line) in [("Loaded", &block.loaded), ("Empty", &block.empty), ("Total", &block.total)] {
                rows.push([
                    group.to_string(),
                    kind.to_string(),
                    thousands(round_half_up(line.miles)),
                    format!("{}%", round_half_up(line.pct_of_total)),
                    thousands(dollars(line.cost_without_autonomy)),
                    format!("{:.2}", block.adjustment),
                    thousands(dollars(line.cost)),
                ]);
            }
        }
        rows.push([
            "ATHN".into(),
            "Total".into(),
            thousands(round_half_up(self.athn_miles)),
            String::new(),
            thousands(dollars(self.athn_cost_without_autonomy)),
            String::new(),
            thousands(dollars(self.athn_cost)),
        ]);
        rows.push([
            "Savings".into(),
            String::new(),
            thousands(round_half_up(self.savings_miles)),
            String::new(),
            thousands(dollars(self.savings_without_autonomy)),
            String::new(),
            thousands(dollars(self.savings_dollars)),
        ]);
        let without_pct = if self.current.total.cost_without_autonomy > 0.0 {
            100.0 * self.savings_without_autonomy / self.current.total.cost_without_autonomy
        } else {
            0.0
        };
        rows.push([
            "Savings (%)".into(),
            String::new(),
            format!("{}%", round_half_up(self.savings_miles_pct)),
            String::new(),
            format!("{}%", round_half_up(without_pct)),
            String::new(),
            format!("{}%", round_half_up(self.savings_pct)),
        ]);
        rows
    }

    const HEADER: [&'static str; 7] = [
        "group",
        "line",
        "miles",
        "pct_of_total",
        "cost_without_autonomy",
        "cost_adjustment",
        "cost",
    ];

    /// Aligned plain-text rendering with whole dollars and percentages.
    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let mut widths = Self::HEADER.map(str::len);
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[&str]| {
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i < 2 {
                    let _ = write!(out, "{cell:<w$}  ");
                } else {
                    let _ = write!(out, "{cell:>w$}  ");
                }
            }
            let trimmed = out.trim_end().len();
            out.truncate(trimmed);
            out.push('\n');
        };
        line(&Self::HEADER);
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(String::as_str).collect();
            line(&cells);
        }
        out
    }

    /// CSV with the same cells as the text table, without thousands
    /// separators.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::HEADER).expect("in-memory write");
        for r in self.rows() {
            let cells: Vec<String> = r.iter().map(|c| c.replace(',', "")).collect();
            w.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// The swept parameter: α as a fraction, or Δ in minutes.
    pub value: f64,
    pub automated_orders: usize,
    pub rel_savings_pct: f64,
    /// Milli-dollars.
    pub savings_dollars: f64,
    /// Change in savings relative to the first row, in percent.
    pub delta_vs_base_pct: f64,
    pub heuristic_used: bool,
    /// Savings dropped below an earlier row with less flexibility.
    pub non_monotone: bool,
}

fn sweep_rows(points: Vec<(f64, PipelineReport)>) -> Vec<SweepRow> {
    let base = points.first().map_or(0.0, |(_, r)| r.cost_table.savings_dollars);
    points
        .into_iter()
        .map(|(value, r)| SweepRow {
            value,
            automated_orders: r.selection.athn.len(),
            rel_savings_pct: r.cost_table.savings_pct,
            savings_dollars: r.cost_table.savings_dollars,
            delta_vs_base_pct: if base != 0.0 {
                100.0 * (r.cost_table.savings_dollars - base) / base.abs()
            } else {
                0.0
            },
            heuristic_used: r.used_heuristic(),
            non_monotone: false,
        })
        .collect()
}

/// Reruns the pipeline for every α, rows in the order given.
pub fn sweep_alpha(
    instance: &InstanceFile,
    alphas: &[Fraction],
    opts: &PipelineOptions,
) -> Result<Vec<SweepRow>, PipelineError> {
    let points = alphas
        .par_iter()
        .map(|&a| {
            let mut inst = instance.clone();
            inst.config.alpha = a;
            run_pipeline(&inst, opts).map(|r| (a.as_f64(), r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sweep_rows(points))
}

/// Reruns the pipeline for every Δ. A row is flagged when its savings fall
/// below those of a row with smaller Δ, which only a heuristic can cause.
pub fn sweep_delta(
    instance: &InstanceFile,
    deltas: &[Minutes],
    opts: &PipelineOptions,
) -> Result<Vec<SweepRow>, PipelineError> {
    let points = deltas
        .par_iter()
        .map(|&d| {
            let mut inst = instance.clone();
            inst.config.flexibility = d;
            run_pipeline(&inst, opts).map(|r| (d as f64, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = sweep_rows(points);
    for i in 0..rows.len() {
        let (value, savings) = (rows[i].value, rows[i].savings_dollars);
        rows[i].non_monotone = rows
            .iter()
            .any(|r| r.value < value && r.savings_dollars > savings + 1e-6);
    }
    Ok(rows)
}

pub fn sweep_to_text(rows: &[SweepRow], parameter: &str) -> String {
    let mut out = format!(
        "{parameter:>8}  {:>15}  {:>12}  {:>14}  {:>18}\n",
        "automated_orders", "rel_savings", "cost_savings", "vs_base"
    );
    for r in rows {
        let flag = if r.non_monotone { "  *" } else { "" };
        let _ = writeln!(
            out,
            "{:>8}  {:>15}  {:>11}%  {:>14}  {:>17.1}%{flag}",
            r.value,
            r.automated_orders,
            round_half_up(r.rel_savings_pct),
            thousands(dollars(r.savings_dollars)),
            r.delta_vs_base_pct
        );
    }
    out
}

pub fn sweep_to_csv(rows: &[SweepRow], parameter: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        parameter,
        "automated_orders",
        "rel_savings_pct",
        "savings_dollars",
        "delta_vs_base_pct",
        "non_monotone",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.automated_orders.to_string(),
            round_half_up(r.rel_savings_pct).to_string(),
            dollars(r.savings_dollars).to_string(),
            format!("{:.1}", r.delta_vs_base_pct),
            r.non_monotone.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
