use std::path::Path;
use std::process::{Command, Output};

use exactnmf::io::read_matrix;
use exactnmf::linalg::relative_error;
use exactnmf::generators::lookup;

fn exactnmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exactnmf"))
        .args(args)
        .output()
        .expect("spawn exactnmf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_writes_header_and_rows() {
    let o = exactnmf(&["generate", "--name", "LEDM6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "6 6");
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[1], "0 1 4 9 16 25");
}

#[test]
fn generate_to_csv_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let o = exactnmf(&["generate", "--family", "generic-ngon", "--n", "7", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_matrix(&path).unwrap();
    assert_eq!(m.shape(), (7, 7));
}

#[test]
fn rank_of_registry_matrix() {
    let o = exactnmf(&["rank", "--matrix", "LEDM6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "rank 3");
}

#[test]
fn rank_of_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.mat");
    assert!(exactnmf(&["generate", "--name", "UDISJ4", "--out", path.to_str().unwrap()]).status.success());
    let o = exactnmf(&["rank", "--matrix", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "rank 9");
}

#[test]
fn factorize_hexagon_and_reverify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = exactnmf(&[
        "factorize", "--matrix", "6-G", "--r", "5", "--heuristic", "rbr", "--seed", "1",
        "--refine-sweeps", "10000", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let w = read_matrix(&dir.path().join("W.mat")).unwrap();
    let h = read_matrix(&dir.path().join("H.mat")).unwrap();
    assert_eq!(w.shape(), (6, 5));
    assert_eq!(h.shape(), (5, 6));
    assert!(w.is_nonnegative() && h.is_nonnegative());

    let run: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(run["success"], true);
    assert_eq!(run["heuristic"], "rbr");
    let reported = run["error"].as_f64().unwrap();
    let x = lookup("6-G").unwrap().matrix;
    let e = relative_error(&x, &w, &h).unwrap();
    // text output is round-trip exact, so the recomputed error matches
    assert!((e - reported).abs() <= 1e-12, "{e} vs {reported}");
    assert!(e <= 1e-6);
}

#[test]
fn factorize_failure_exits_three() {
    // rank 3 is below the nonnegative rank of the hexagon
    let dir = tempfile::tempdir().unwrap();
    let o = exactnmf(&[
        "factorize", "--matrix", "6-G", "--r", "3", "--heuristic", "ms1",
        "--refine-sweeps", "200", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(Path::new(&dir.path().join("run.json")).exists());
    assert!(!dir.path().join("W.mat").exists());
}

#[test]
fn unknown_matrix_is_usage_error() {
    let o = exactnmf(&["factorize", "--matrix", "LEDM7", "--r", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("LEDM6"));
}

#[test]
fn invalid_rank_is_usage_error() {
    let o = exactnmf(&["factorize", "--matrix", "LEDM6", "--r", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(exactnmf(&["factorize", "--matrix", "LEDM6", "--r", "3", "--solver", "sgd"]).status.code(), Some(2));
    assert_eq!(exactnmf(&["bench", "--table", "t9"]).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let o = exactnmf(&["verify"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 18);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn sweep_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = exactnmf(&[
        "sweep", "--param", "alpha", "--values", "0.9,0.99", "--heuristic", "rbr", "--matrices", "6-G",
        "--max-runs", "2", "--target", "1", "--check-every", "2", "--refine-sweeps", "2000",
        "--workers", "1", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["md", "csv", "jsonl", "meta.json"] {
        assert!(dir.path().join(format!("sweep-alpha.{ext}")).exists(), "{ext}");
    }
    let md = std::fs::read_to_string(dir.path().join("sweep-alpha.md")).unwrap();
    assert!(md.contains("| 6-G |"));
    let records = std::fs::read_to_string(dir.path().join("sweep-alpha.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 4);
}
