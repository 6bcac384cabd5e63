use std::path::PathBuf;

use athn::costing::{build_cost_table, sweep_alpha, sweep_delta};
use athn::gantt::emit_gantt;
use athn::instance::InstanceFile;
use athn::model::Fraction;
use athn::pipeline::{run_pipeline, schedule_file, PipelineOptions, SolverUsed};
use athn::synth::{generate_instance, SyntheticSpec};
use athn::SubproblemKind;

fn small(seed: u64, orders: usize) -> InstanceFile {
    generate_instance(&SyntheticSpec {
        hub_count: 4,
        order_count: orders,
        customer_count: 20,
        horizon: 2 * 1440,
        ..SyntheticSpec::small(seed)
    })
    .unwrap()
}

fn exact_only() -> PipelineOptions {
    PipelineOptions {
        exact_threshold: 64,
        ..PipelineOptions::default()
    }
}

/// Set `ATHN_UPDATE_GOLDEN=1` to rewrite the file after reviewing a change.
#[test]
fn gantt_matches_golden_file() {
    let mut inst = small(21, 16);
    inst.fleet.autonomous_count = 3;
    let report = run_pipeline(&inst, &exact_only()).unwrap();
    let file = schedule_file(&report, &inst, 0);
    let svg = emit_gantt(&file, SubproblemKind::AutonomousNet).unwrap();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/gantt_autonomous.svg");
    if std::env::var_os("ATHN_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(svg, golden);
}

#[test]
fn single_alpha_has_zero_delta() {
    let inst = small(5, 12);
    let rows = sweep_alpha(&inst, &[Fraction::from_bp(2500)], &exact_only()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].delta_vs_base_pct, 0.0);
    assert_eq!(rows[0].value, 0.25);
}

#[test]
fn alpha_sweep_rows_match_rerun_tables() {
    let inst = small(8, 12);
    let alphas: Vec<Fraction> = [2500, 3000, 3500, 4000].into_iter().map(Fraction::from_bp).collect();
    let rows = sweep_alpha(&inst, &alphas, &exact_only()).unwrap();
    for (row, &a) in rows.iter().zip(&alphas) {
        let mut one = inst.clone();
        one.config.alpha = a;
        let r = run_pipeline(&one, &exact_only()).unwrap();
        let t = build_cost_table(
            r.cost_inputs.current,
            r.cost_inputs.autonomous,
            r.cost_inputs.first_last_loaded,
            &one.config,
        )
        .unwrap();
        assert_eq!(row.savings_dollars, t.savings_dollars);
        assert_eq!(row.automated_orders, r.selection.athn.len());
    }
    assert!(rows.windows(2).all(|w| w[0].automated_orders <= w[1].automated_orders));
    assert!(rows.windows(2).all(|w| w[0].savings_dollars <= w[1].savings_dollars));
}

#[test]
fn exact_delta_sweep_never_loses_savings() {
    let inst = small(13, 10);
    let rows = sweep_delta(&inst, &[30, 60, 90, 120], &exact_only()).unwrap();
    assert!(rows.iter().all(|r| !r.heuristic_used && !r.non_monotone));
    assert!(rows.windows(2).all(|w| w[0].savings_dollars <= w[1].savings_dollars));
    // selection does not depend on flexibility
    assert!(rows.iter().all(|r| r.automated_orders == rows[0].automated_orders));
}

#[test]
fn base_case_mixes_solvers() {
    let inst = generate_instance(&SyntheticSpec::small(4)).unwrap();
    let opts = PipelineOptions {
        iterations: 1000,
        ..PipelineOptions::default()
    };
    let report = run_pipeline(&inst, &opts).unwrap();
    assert_eq!(report.schedules[0].0.kind, SubproblemKind::AutonomousNet);
    assert_eq!(report.schedules[0].1, SolverUsed::Heuristic);
    assert_eq!(report.selection.athn.len() + report.selection.direct.len(), 494);
    let file = schedule_file(&report, &inst, 0);
    assert_eq!(file.subproblems.len(), report.schedules.len());
}
