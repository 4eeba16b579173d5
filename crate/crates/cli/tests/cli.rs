use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn noether(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noether")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_problem(dir: &TempDir, name: &str, v: &Value) -> String {
    let path = dir.path().join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.display().to_string()
}

fn oscillator(candidates: Value) -> Value {
    json!({
        "dimension": 1,
        "coordinates": ["x"],
        "metric": [["1"]],
        "V0": "x^2/2",
        "V1": "x^4",
        "order": 1,
        "candidates": candidates,
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_passes_with_exit_zero_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let out = noether(&["verify", path_str(&fixture("case2")), "--report", path_str(&report)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["command"], "verify");
    assert_eq!(r["passed"], true);
    assert_eq!(r["verdicts"].as_array().unwrap().len(), 6);
}

#[test]
fn json_flag_prints_report() {
    let out = noether(&["derive", path_str(&fixture("case1_order1")), "--json"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["equation_count"], 8);
}

#[test]
fn broken_candidate_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(&dir, "broken", &oscillator(json!([{ "name": "shift", "xi": ["0", "0"], "eta": [["1"], ["0"]] }])));
    let out = noether(&["verify", &p, "--json"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("witness"), "{text}");
    let text = stdout(&noether(&["verify", &p]));
    assert!(text.contains("shift"), "{text}");
}

#[test]
fn unknown_candidate_is_input_error() {
    let out = noether(&["verify", path_str(&fixture("case2")), "--candidate", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&noether(&["verify", path_str(&missing)])), 2);
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&noether(&["verify", path_str(&garbage)])), 2);
    let p = write_problem(&dir, "bad_expr", &oscillator(json!([{ "name": "z", "xi": ["1 +", "0"], "eta": [["0"], ["0"]] }])));
    let out = noether(&["verify", &p]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("candidates[0]"));
}

#[test]
fn simulate_without_simulation_block_exits_two() {
    assert_eq!(code(&noether(&["simulate", path_str(&fixture("case2"))])), 2);
}

#[test]
fn solve_without_ansatz_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(&dir, "no_ansatz", &oscillator(json!([])));
    assert_eq!(code(&noether(&["solve", &p])), 2);
    let mut v = oscillator(json!([]));
    v["ansatz"] = json!({ "time_basis": [], "spatial_degree": 1 });
    let p = write_problem(&dir, "empty_ansatz", &v);
    assert_eq!(code(&noether(&["solve", &p])), 2);
}

#[test]
fn killing_on_non_polynomial_metric_is_unsupported() {
    let dir = TempDir::new().unwrap();
    let v = json!({
        "dimension": 2,
        "coordinates": ["x", "y"],
        "metric": [["1"], ["0", "exp(x)"]],
        "V0": "0",
        "order": 1,
    });
    let p = write_problem(&dir, "curved", &v);
    assert_eq!(code(&noether(&["killing", &p])), 3);
}

#[test]
fn killing_counts_flat_fields() {
    let out = noether(&["killing", path_str(&fixture("euclidean2d")), "--json"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["homothetic_basis"].as_array().unwrap().len(), 4);
}

#[test]
fn simulate_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = noether(&[
        "simulate",
        path_str(&fixture("oscillator")),
        "--t-end",
        "1",
        "--dt",
        "0.01",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,v1,I_energy,I_J");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    let last: Vec<f64> = rows[100].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[1] - 1f64.cos()).abs() < 1e-9);
}

#[test]
fn simulate_epsilon_flag_overrides_fixture() {
    let out = noether(&["simulate", path_str(&fixture("case4")), "--epsilon", "0.01", "0.005", "--t-end", "10", "--json"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["epsilons"], json!([0.01, 0.005]));
    assert_eq!(r["drift_records"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_blow_up_exits_one() {
    let dir = TempDir::new().unwrap();
    let mut v = oscillator(json!([{ "name": "energy", "xi": ["1", "0"], "eta": [["0"], ["0"]] }]));
    v["V0"] = json!("-x^4");
    v["V1"] = json!("0");
    v["simulation"] = json!({ "initial": [1.0, 1.0], "t_end": 10.0, "dt": 0.01, "epsilons": [0.0] });
    let p = write_problem(&dir, "blowup", &v);
    assert_eq!(code(&noether(&["simulate", &p])), 1);
}

#[test]
fn set_overrides_symbolic_parameter() {
    let out = noether(&["verify", path_str(&fixture("case1_order1")), "--set", "w=3", "--set", "w0=1/2", "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = noether(&["verify", path_str(&fixture("case1_order1")), "--set", "w"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn same_seed_gives_identical_reports() {
    let a = stdout(&noether(&["solve", path_str(&fixture("case5")), "--json", "--seed", "7"]));
    let b = stdout(&noether(&["solve", path_str(&fixture("case5")), "--json", "--seed", "7"]));
    assert_eq!(a, b);
    assert!(a.contains("\"seed\": 7"));
}
