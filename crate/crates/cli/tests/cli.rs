use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use athn::instance::{InstanceFile, ScheduleFile};
use tempfile::TempDir;

fn athn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_athn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_instance(dir: &TempDir, seed: &str) -> PathBuf {
    let out = path(dir, &format!("inst{seed}.json"));
    let o = athn(&[
        "--seed", seed, "generate", "--hubs", "4", "--orders", "25", "--customers", "30", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = std::fs::read(small_instance(&dir, "5")).unwrap();
    let b = path(&dir, "again.json");
    athn(&["--seed", "5", "generate", "--hubs", "4", "--orders", "25", "--customers", "30", "--out", s(&b)]);
    assert_eq!(a, std::fs::read(&b).unwrap());
    let text = String::from_utf8(a).unwrap();
    let inst = InstanceFile::from_json(&text).unwrap();
    assert_eq!(inst.orders.len(), 25);
    assert_eq!(inst.to_json(), text);
}

#[test]
fn solve_report_and_gantt() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir, "1");
    let sched = path(&dir, "sched.json");
    let o = athn(&["--iterations", "500", "solve", "--instance", s(&inst), "--out", s(&sched)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("Savings"));

    let o = athn(&["report", "--schedule", s(&sched), "--csv"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.starts_with("group,line,miles"));

    let file = ScheduleFile::from_json(&std::fs::read_to_string(&sched).unwrap()).unwrap();
    let svg = path(&dir, "g.svg");
    let o = athn(&["gantt", "--schedule", s(&sched), "--out", s(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    let tasks: usize = file.subproblems[0].trucks.iter().map(|t| t.tasks.len()).sum();
    assert_eq!(text.matches("class=\"task\"").count(), tasks);

    let o = athn(&["gantt", "--schedule", s(&sched), "--hub", "999", "--out", s(&svg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_instance_gives_zero_table() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir, "2");
    let mut file = InstanceFile::from_json(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    file.orders.clear();
    let empty = path(&dir, "empty.json");
    std::fs::write(&empty, file.to_json()).unwrap();
    let sched = path(&dir, "sched.json");
    let o = athn(&["solve", "--instance", s(&empty), "--out", s(&sched), "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("Current network,Total,0,"), "{csv}");
    assert!(csv.contains("Savings,,0,,0,,0"), "{csv}");
}

#[test]
fn infeasible_exits_one_and_names_the_subproblem() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir, "3");
    let sched = path(&dir, "sched.json");
    let o = athn(&["--delta", "0", "--trucks", "1", "solve", "--instance", s(&inst), "--out", s(&sched)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("subproblem autonomous"), "{err}");
    assert!(!sched.exists());
}

#[test]
fn bad_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1,").unwrap();
    let o = athn(&["solve", "--instance", s(&bad), "--out", s(&path(&dir, "x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line"));

    let inst = small_instance(&dir, "4");
    let o = athn(&["--alpha", "1.5", "select", "--instance", s(&inst)]);
    assert_eq!(o.status.code(), Some(2));
    let o = athn(&["report", "--schedule", s(&path(&dir, "missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_csv_lists_every_order() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir, "6");
    let o = athn(&["select", "--instance", s(&inst), "--csv"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 26);
    assert!(out.lines().skip(1).all(|l| l.contains(",athn,") || l.contains(",direct,")));
}

#[test]
fn alpha_sweep_rows_in_order() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir, "7");
    let o = athn(&["--iterations", "300", "sweep-alpha", "--instance", s(&inst), "--alphas", "0.25,0.4", "--csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.25,") && rows[2].starts_with("0.4,"));
}

#[test]
fn ingest_sample_files() {
    let dir = TempDir::new().unwrap();
    let stops = path(&dir, "stops.csv");
    std::fs::write(
        &stops,
        "StopNum,OrderNum,StopArrivalDate,StopDepartureDate,Stop,City,ZipCode,Status,Event\n\
1,10,1-3-2021 08:00,1-3-2021 09:00,1,Atlanta,30303,LD,HPL\n\
2,10,1-3-2021 14:00,1-3-2021 15:00,2,Nashville,37201,LD,LUL\n\
3,10,1-3-2021 21:00,1-3-2021 21:30,3,Atlanta,30303,MT,DMT\n",
    )
    .unwrap();
    let matrix = path(&dir, "matrix.csv");
    std::fs::write(&matrix, "from,to,miles,minutes\n30303,37201,250,300\n37201,30303,250,300\n").unwrap();
    let access = path(&dir, "access.csv");
    std::fs::write(&access, "location,count\n30303,5\n37201,3\n").unwrap();
    let out = path(&dir, "inst.json");
    let o = athn(&[
        "ingest", "--stops", s(&stops), "--matrix", s(&matrix), "--access", s(&access), "--hubs", "2", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let inst = InstanceFile::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(inst.orders.len(), 1);
    assert_eq!(inst.network.hubs().count(), 2);
}
