//! SVG renderings of a schedule: a per-truck timeline and a route map.
//! Loaded work is drawn blue and empty driving red.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{ScheduleFile, SubproblemSchedule};
use crate::model::{Minutes, Network, SubproblemKind};

const LOADED: &str = "#1f5fbf";
const EMPTY: &str = "#d62728";
const WIDTH: f64 = 1200.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const ROW: f64 = 18.0;
const BAR: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GanttError {
    #[error("schedule has no subproblem {0}")]
    UnknownSubproblem(SubproblemKind),
    #[error("schema: {0}")]
    Schema(String),
}

fn schema(msg: String) -> GanttError {
    GanttError::Schema(msg)
}

/// Checks that trucks are in range and listed once, that task intervals
/// are well formed, and that every relocation joins two consecutive tasks
/// of its own truck.
fn check(sub: &SubproblemSchedule) -> Result<(), GanttError> {
    let mut seen = BTreeSet::new();
    for t in &sub.trucks {
        if t.truck >= sub.truck_count {
            return Err(schema(format!("truck {} out of range 0..{}", t.truck, sub.truck_count)));
        }
        if !seen.insert(t.truck) {
            return Err(schema(format!("truck {} listed twice", t.truck)));
        }
        for task in &t.tasks {
            if task.end < task.start {
                return Err(schema(format!("task {} ends before it starts", task.task_id)));
            }
        }
        for r in &t.relocations {
            let consecutive = t
                .tasks
                .windows(2)
                .any(|w| w[0].task_id == r.after && w[1].task_id == r.before);
            if !consecutive {
                return Err(schema(format!(
                    "relocation {} -> {} does not join consecutive tasks of truck {}",
                    r.after, r.before, t.truck
                )));
            }
        }
    }
    Ok(())
}

fn span(sub: &SubproblemSchedule, horizon: Minutes) -> Minutes {
    sub.trucks
        .iter()
        .flat_map(|t| t.tasks.iter().map(|x| x.end).chain(t.relocations.iter().map(|r| r.arrive)))
        .fold(horizon.max(1), Minutes::max)
}

fn tick_step(span: Minutes) -> Minutes {
    if span >= 2 * 1440 {
        1440
    } else if span >= 12 * 60 {
        120
    } else {
        30
    }
}

fn tick_label(t: Minutes, step: Minutes) -> String {
    if step == 1440 {
        format!("day {}", t / 1440)
    } else {
        format!("{}:{:02}", t / 60, t % 60)
    }
}

/// Timeline of one subproblem: a row per truck, task bars in blue and
/// relocation bars in red.
pub fn emit_gantt(file: &ScheduleFile, kind: SubproblemKind) -> Result<String, GanttError> {
    let sub = file.subproblem(kind).ok_or(GanttError::UnknownSubproblem(kind))?;
    check(sub)?;
    let end = span(sub, file.config.horizon);
    let rows = sub.truck_count;
    let height = TOP + ROW * rows as f64 + 40.0;
    let scale = (WIDTH - LEFT - RIGHT) / end as f64;
    let x = |t: Minutes| LEFT + t as f64 * scale;
    let axis_y = TOP + ROW * rows as f64 + 4.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="16" font-size="12">{kind}</text>"#);
    let step = tick_step(end);
    let mut t = 0;
    while t <= end {
        let _ = writeln!(
            s,
            r##"<line class="tick" x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{axis_y:.2}" stroke="#ddd"/>"##,
            x(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x(t),
            axis_y + 12.0,
            tick_label(t, step)
        );
        t += step;
    }
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{LEFT}" y1="{axis_y:.2}" x2="{:.2}" y2="{axis_y:.2}" stroke="#000"/>"##,
        WIDTH - RIGHT
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{axis_y:.2}" stroke="#000"/>"##
    );
    for truck in 0..rows {
        let y = TOP + ROW * truck as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">truck {truck}</text>"#,
            LEFT - 6.0,
            y + BAR - 2.0
        );
    }
    for truck in &sub.trucks {
        let y = TOP + ROW * truck.truck as f64;
        for task in &truck.tasks {
            let _ = writeln!(
                s,
                r#"<rect class="task" x="{:.2}" y="{y:.2}" width="{:.2}" height="{BAR}" fill="{LOADED}"><title>task {} ({}) {}-{}</title></rect>"#,
                x(task.start),
                (task.end - task.start) as f64 * scale,
                task.task_id,
                task.leg,
                task.start,
                task.end
            );
        }
        for r in &truck.relocations {
            let _ = writeln!(
                s,
                r#"<rect class="relocation" x="{:.2}" y="{y:.2}" width="{:.2}" height="{BAR}" fill="{EMPTY}"><title>empty {} to {}, {} mi</title></rect>"#,
                x(r.depart),
                (r.arrive - r.depart) as f64 * scale,
                r.from,
                r.to,
                r.miles
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Map of one subproblem's movements over location coordinates: loaded
/// task legs in blue, relocations in red. Locations without coordinates are
/// skipped.
pub fn emit_route_map(file: &ScheduleFile, network: &Network, kind: SubproblemKind) -> Result<String, GanttError> {
    let sub = file.subproblem(kind).ok_or(GanttError::UnknownSubproblem(kind))?;
    check(sub)?;
    let pos: Vec<Option<(f64, f64)>> = network.locations().iter().map(|l| l.position).collect();
    let known: Vec<(f64, f64)> = pos.iter().flatten().copied().collect();
    let (min_x, max_x) = known.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (min_y, max_y) = known.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let size = 800.0;
    let pad = 20.0;
    let extent = (max_x - min_x).max(max_y - min_y).max(1.0);
    let map = |p: (f64, f64)| {
        (
            pad + (p.0 - min_x) / extent * (size - 2.0 * pad),
            size - pad - (p.1 - min_y) / extent * (size - 2.0 * pad),
        )
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let line = |s: &mut String, a: usize, b: usize, class: &str, color: &str| {
        if let (Some(Some(p)), Some(Some(q))) = (pos.get(a), pos.get(b)) {
            let (p, q) = (map(*p), map(*q));
            let _ = writeln!(
                s,
                r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-opacity="0.5"/>"#,
                p.0, p.1, q.0, q.1
            );
        }
    };
    for truck in &sub.trucks {
        for t in &truck.tasks {
            line(&mut s, t.origin.0, t.destination.0, "loaded", LOADED);
        }
        for r in &truck.relocations {
            line(&mut s, r.from.0, r.to.0, "empty", EMPTY);
        }
    }
    for l in network.locations() {
        if let (Some(p), true) = (l.position, l.is_hub()) {
            let (x, y) = map(p);
            let _ = writeln!(s, r##"<circle class="hub" cx="{x:.2}" cy="{y:.2}" r="4" fill="#000"/>"##);
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
