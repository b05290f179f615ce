use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use armplan::output::{TRACE_HEADER, TRAJECTORY_HEADER};
use armplan::scenario::{load_scenario, ScenarioFile};

fn armplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armplan"))
        .args(args)
        .output()
        .expect("spawn armplan")
}

fn sample_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/reach_around.toml")
}

fn plan_into(dir: &Path, scenario: &Path) -> Output {
    armplan(&[
        "plan",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn plan_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = plan_into(dir.path(), &sample_scenario());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("outcome=Success"));

    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER.join(","));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r.len() == TRAJECTORY_HEADER.len()));
    assert_eq!(rows[0][0], "0");
    assert!(rows.iter().all(|r| r[13] == "0" || r[13] == "1"));
    assert!(!traj.contains('\r'));

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER.join(","));
    // 100 generations per planned step
    assert_eq!(trace.lines().count() - 1, 100 * (rows.len() - 1));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(plan_into(a.path(), &sample_scenario()).status.success());
    assert!(plan_into(b.path(), &sample_scenario()).status.success());
    for name in ["trajectory.csv", "trace.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn start_at_goal_has_only_the_start_row() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("parked.toml");
    fs::write(
        &scenario,
        "start_deg = [0.0, 0.0, 0.0]\ngoal = [0.0, 0.0, 3.0]\n\n[arm]\nlink_lengths = [1.0, 1.0, 1.0]\n",
    )
    .unwrap();
    let out = plan_into(dir.path(), &scenario);
    assert!(out.status.success());
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 2);
    assert!(traj.ends_with(",inf,0\n"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace, TRACE_HEADER.join(",") + "\n");
}

#[test]
fn bad_scenario_fails_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.toml");
    fs::write(
        &scenario,
        "start_deg = [0.0, 0.0, 0.0]\ngoal = [1.0, 0.0, 1.0]\n\n[arm]\nlink_lengths = [1.0, -1.0, 1.0]\n",
    )
    .unwrap();
    let out = plan_into(dir.path(), &scenario);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("link_lengths"));
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn sample_scenario_round_trips() {
    let loaded = load_scenario(sample_scenario()).unwrap();
    assert_eq!(loaded.scenario.obstacles.len(), 2);
    assert!((loaded.scenario.obstacles[1].radius - 0.25 * 3f64.sqrt() / 2.0).abs() < 1e-15);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.toml");
    ScenarioFile::read(sample_scenario())
        .unwrap()
        .write(&path)
        .unwrap();
    assert_eq!(load_scenario(&path).unwrap(), loaded);
}

#[test]
fn de_bench_prints_history() {
    let out = armplan(&[
        "de-bench",
        "--function",
        "rastrigin",
        "--dim",
        "4",
        "--iters",
        "30",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let history: Vec<f64> = text
        .lines()
        .skip_while(|l| *l != "generation,best_cost")
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(history.len(), 30);
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn unknown_function_is_an_error() {
    let out = armplan(&["de-bench", "--function", "ackley"]);
    assert!(!out.status.success());
}

#[test]
fn montecarlo_reports_rates() {
    let out = armplan(&[
        "montecarlo",
        "--trials",
        "4",
        "--seed",
        "5",
        "--obstacles",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("trials=4 "));
    assert!(text.contains("success_rate="));
    assert!(text.contains("threat_rate="));
}
