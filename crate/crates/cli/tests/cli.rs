use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DIAG: &str = r#"{"kind":"DiagReal","dim":2,"params":{"a":-0.5,"b":3}}"#;
const KRON1: &str = r#"{"kind":"Kronecker","dim":1,"params":{}}"#;

fn jclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jclass"))
        .args(args)
        .env_remove("JCLASS_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn last_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().last().expect("a stdout line");
    serde_json::from_str(line).expect("json line")
}

#[test]
fn solve_finds_the_pinned_pair() {
    let o = jclass(&["solve", "--a", "-0.5", "--b", "3", "--y", "1", "--eps", "0.05", "--min-k", "1", "--min-l", "1"]);
    assert_eq!(code(&o), 0);
    let v = last_json(&o);
    assert_eq!(v["exponents"], serde_json::json!([38, 24]));
    assert_eq!(v["exhausted"], false);
}

#[test]
fn solve_exhaustion_exits_one() {
    let o = jclass(&["solve", "--a", "-0.5", "--b", "3", "--y", "1", "--eps", "1e-12", "--min-k", "1", "--min-l", "1", "--k-max", "50"]);
    assert_eq!(code(&o), 1);
    assert_eq!(last_json(&o)["exhausted"], true);
}

#[test]
fn invalid_parameters_exit_two() {
    let o = jclass(&["solve", "--a", "2", "--b", "3", "--y", "1"]);
    assert_eq!(code(&o), 2);
    let v = last_json(&o);
    assert!(v["error"].is_string());
    assert_eq!(v["exhausted"], false);

    let o = jclass(&["kron", "--n", "2", "--y", "1"]);
    assert_eq!(code(&o), 2);

    let o = jclass(&["construct", "--recipe", "{not json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn membership_flags_agree_with_exit_code() {
    let confirmed = jclass(&["member", "--tuple", DIAG, "--x", "1,0", "--y", "1,5", "--delta", "0.05", "--growth-floor", "10", "--budget", "80"]);
    assert_eq!(code(&confirmed), 0);
    assert_eq!(last_json(&confirmed)["exhausted"], false);

    let stuck = jclass(&["member", "--tuple", DIAG, "--x", "0,1", "--y", "0,0", "--delta", "0.05", "--budget", "40"]);
    assert_eq!(code(&stuck), 1);
    assert_eq!(last_json(&stuck)["exhausted"], true);
}

#[test]
fn negative_vectors_parse() {
    let o = jclass(&["witness", "--tuple", DIAG, "--target", "-1.5,2", "--schedule", "0.1,0.01"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = last_json(&o);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);

    let o = jclass(&["lemma55", "--a", "2", "--theta", "2.6", "--w", "-1,1", "--eps", "0.01"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn witness_csv_has_one_row_per_tolerance() {
    let o = jclass(&["witness", "--tuple", DIAG, "--target", "1,2", "--schedule", "0.1,0.01,0.001", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "i,x_i,K_i,image,image_error,base_error");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
}

#[test]
fn orbit_to_density_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    let csv_s = csv.to_str().unwrap();
    let o = jclass(&["orbit", "--tuple", KRON1, "--x", "1", "--max-total", "600", "--out", csv_s]);
    assert_eq!(code(&o), 0);
    let summary = last_json(&o);
    let n = summary["points"].as_u64().unwrap();
    assert!(n > 0);
    let rows = fs::read_to_string(&csv).unwrap().lines().count() as u64;
    assert_eq!(rows, n + 1);

    let d = jclass(&["density", "--in", csv_s]);
    assert_eq!(code(&d), 0);
    let v = last_json(&d);
    assert_eq!(v["points_used"].as_u64().unwrap(), n);
    assert!(v["coverage"].as_f64().unwrap() >= 0.95);
}

#[test]
fn density_missing_file_names_the_path() {
    let o = jclass(&["density", "--in", "/nonexistent/points.csv"]);
    assert_eq!(code(&o), 2);
    assert!(last_json(&o)["error"].as_str().unwrap().contains("/nonexistent/points.csv"));
}

fn run_to_file(args: &[&str], out: &Path) -> Vec<u8> {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(code(&jclass(&full)), 0);
    fs::read(out).unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["orbit", "--tuple", KRON1, "--x", "1", "--max-total", "300"];
    let a = run_to_file(&args, &dir.path().join("a.csv"));
    let b = run_to_file(&args, &dir.path().join("b.csv"));
    assert_eq!(a, b);

    let seq: Vec<&str> = ["--sequential"].into_iter().chain(args).collect();
    let c = run_to_file(&seq, &dir.path().join("c.csv"));
    assert_eq!(a, c);

    let probe = ["probe", "--tuple", KRON1, "--span", "1", "--samples", "8", "--seed", "7"];
    let p = jclass(&probe);
    let q = jclass(&probe);
    assert_eq!(code(&p), 0);
    assert_eq!(p.stdout, q.stdout);
    let v = last_json(&p);
    assert_eq!(v["seed"], 7);
    assert!(v["config"]["thresholds"].is_object());
}

#[test]
fn results_stay_off_stderr_by_default() {
    let o = jclass(&["lemma51", "--a", "2", "--x", "0.5", "--eps", "0.01"]);
    assert_eq!(code(&o), 0);
    assert!(o.stderr.is_empty());
    assert!(last_json(&o).is_object());
}
