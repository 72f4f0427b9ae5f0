use std::path::Path;
use std::process::{Command, Output};

use graph_shift::io::read_matrix_file;
use graph_shift::{gen_fdm, gen_pdm};
use serde_json::Value;

fn gshift(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gshift"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn generate_writes_matrix_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gshift(d, &["generate", "--family", "fdm", "--n", "100", "--seed", "7", "--out", "m.txt"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(d.join("m.txt")).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert_eq!(read_matrix_file(&d.join("m.txt")).unwrap(), gen_fdm(100, 7).unwrap());
    let meta = read_json(&d.join("m.txt.json"));
    assert_eq!(meta["spec"]["family"], "fdm");
    assert_eq!(meta["spec"]["seed"], 7);
    assert!(meta["prng"].as_str().unwrap().contains("ChaCha8"));

    let o = gshift(
        d,
        &["generate", "--family", "pdm", "--n", "500", "--sparse-rate", "0.263", "--seed", "7", "--format", "sparse", "--out", "p.txt"],
    );
    assert_eq!(code(&o), 0);
    let sr = read_json(&d.join("p.txt.json"))["realized_sparse_rate"].as_f64().unwrap();
    assert!((sr - 0.263).abs() < 0.02);
    let p = read_matrix_file(&d.join("p.txt")).unwrap();
    assert!(p.is_sparse());
    assert_eq!(p.to_dense(), gen_pdm(500, 0.263, 7).unwrap());

    let o = gshift(d, &["generate", "--family", "btm", "--n", "1300", "--blocks", "13", "--seed", "1", "--out", "b.txt"]);
    assert_eq!(code(&o), 0);
    let sr = read_json(&d.join("b.txt.json"))["realized_sparse_rate"].as_f64().unwrap();
    assert!((sr - 0.219).abs() < 0.002, "{sr}");
}

#[test]
fn generate_default_name_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gshift(d, &["generate", "--family", "fdm", "--n", "5", "--seed", "3"])), 0);
    assert!(d.join("fdm_5_3.txt").exists());
    assert!(d.join("fdm_5_3.txt.json").exists());

    let o = gshift(d, &["generate", "--family", "pdm", "--n", "10", "--sparse-rate", "0.95", "--seed", "1"]);
    assert_eq!(code(&o), 1);
    let o = gshift(d, &["generate", "--family", "fdm", "--n", "5", "--seed", "1", "--out", "missing/dir/m.txt"]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn run_reports_modes_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d, "edge.txt", "2\n0 1\n1 0\n");
    fixture(d, "a3.txt", "sparse 3 3\n0 1 0.5\n0 2 0.2\n1 2 0.1\n");

    let o = gshift(d, &["run", "--matrix-file", "edge.txt", "--start", "0", "--algorithm", "gs"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["final_objective"], 0.5);
    assert_eq!(r["final_x"], serde_json::json!([0.5, 0.5]));
    assert_eq!(r["converged"], true);
    assert_eq!(r["config"]["eps_kkt"], 1e-6);

    let o = gshift(d, &["run", "--matrix-file", "edge.txt", "--start", "0", "--algorithm", "dspc"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["mode_support"], serde_json::json!([0, 1]));

    let o = gshift(d, &["run", "--matrix-file", "a3.txt", "--start", "0", "--trace", "t.json"]);
    assert_eq!(code(&o), 0);
    let t = read_json(&d.join("t.json"));
    assert_eq!(t[0]["vertex"], 0);
    assert_eq!(t[0]["steps"][0]["phase"], "NE");
    assert_eq!(t[0]["steps"][0]["outer"], 1);

    // Budget exhaustion.
    let o = gshift(
        d,
        &["run", "--matrix-file", "a3.txt", "--start", "0", "--max-rd-iters", "1", "--max-outer-iters", "1", "--tol-kkt", "1e-300", "--tol-fix", "1e-300"],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["converged"], false);

    assert_eq!(code(&gshift(d, &["run", "--family", "fdm", "--n", "10", "--seed", "1", "--start", "99"])), 1);
    assert_eq!(code(&gshift(d, &["run", "--matrix-file", "edge.txt", "--start", "0", "--tol-kkt", "-1"])), 1);
    assert_eq!(code(&gshift(d, &["run", "--matrix-file", "nope.txt", "--start", "0"])), 2);
    let both = gshift(d, &["run", "--matrix-file", "edge.txt", "--family", "fdm", "--n", "3", "--start", "0"]);
    assert_eq!(code(&both), 1);
}

#[test]
fn malformed_matrices_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d, "asym.txt", "3\n0 1 0\n2 0 0\n0 0 0\n");
    fixture(d, "diag.txt", "2\n1 0\n0 0\n");
    fixture(d, "junk.txt", "sparse 3 1\n0 x 0.5\n");
    for (file, line) in [("asym.txt", "line 3"), ("diag.txt", "line 2"), ("junk.txt", "line 2")] {
        let o = gshift(d, &["run", "--matrix-file", file, "--start", "0"]);
        assert_eq!(code(&o), 1, "{file}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(line), "{file}: {err}");
    }
}

#[test]
fn cluster_labels_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d, "two.txt", "sparse 4 2\n0 1 1\n2 3 1\n");
    fixture(d, "zero.txt", "3\n0 0 0\n0 0 0\n0 0 0\n");

    let o = gshift(d, &["cluster", "--matrix-file", "two.txt", "--out", "l.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(d.join("l.csv")).unwrap(), "vertex,label\n0,0\n1,0\n2,1\n3,1\n");
    let modes = read_json(&d.join("l.csv.modes.json"));
    assert_eq!(modes["modes"][1]["support"], serde_json::json!([2, 3]));
    assert_eq!(modes["modes"][0]["objective"], 0.5);
    assert_eq!(modes["all_converged"], true);

    let o = gshift(d, &["cluster", "--matrix-file", "zero.txt", "--algorithm", "dspc"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "vertex,label\n0,0\n1,1\n2,2\n");

    let o = gshift(
        d,
        &["cluster", "--family", "fdm", "--n", "6", "--seed", "2", "--max-rd-iters", "1", "--max-outer-iters", "1", "--tol-kkt", "1e-300", "--tol-fix", "1e-300", "--out", "p.csv"],
    );
    assert_eq!(code(&o), 3);
    assert!(std::fs::read_to_string(d.join("p.csv")).unwrap().contains(",-1"));
    assert_eq!(read_json(&d.join("p.csv.modes.json"))["all_converged"], false);
}

fn strip_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [&f[..5], &f[7..]].concat().join(",")
        })
        .collect()
}

#[test]
fn experiment_rows_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec![
            "experiment", "--families", "fdm,pdm,btm", "--scales", "30,60", "--algorithms", "gs,dspc",
            "--repeats", "3", "--seed", "1", "--max-starts", "6", "--out", out, "--trace", "tr", "--threads", "2",
        ]
    };
    assert_eq!(code(&gshift(d, &args("a.csv"))), 0);
    assert_eq!(code(&gshift(d, &args("b.csv"))), 0);
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(a.lines().count(), 13);
    assert_eq!(a.lines().next().unwrap(), "algorithm,case,scale,m_k,m,T_s,t_s,sr_pct,runs,converged_frac");
    assert_eq!(strip_timing(&a), strip_timing(&b));
    assert!(a.lines().nth(1).unwrap().starts_with("gs,FDM,30,"));

    let meta = read_json(&d.join("a.csv.json"));
    assert_eq!(meta["experiment"]["repeats"], 3);
    assert_eq!(meta["experiment"]["solver"]["merge_tol"], 1e-4);
    let trace = read_json(&d.join("tr.gs-fdm-30.json"));
    assert_eq!(trace.as_array().unwrap().len(), 6);
}

#[test]
fn help_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gshift(dir.path(), &["--help"])), 0);
    assert_eq!(code(&gshift(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&gshift(dir.path(), &["experiment", "--families", "xyz"])), 1);
}
