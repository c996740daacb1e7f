use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bofem::{project, PeriodicWaveParams, UniformPeriodicMesh, WeightFunction};

fn bofem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bofem")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_rows(path: &Path) -> Vec<(f64, f64)> {
    bofem::output::read_xy_csv(path).unwrap()
}

#[test]
fn zero_time_run_writes_the_projected_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bofem(&[
        "run",
        "--problem",
        "periodic-wave",
        "--elements",
        "64",
        "--t-end",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let p = PeriodicWaveParams::reference();
    let mesh = UniformPeriodicMesh::new(-15.0, 15.0, 64).unwrap();
    let u0 = project(|x| p.value(x, 0.0), &mesh, &WeightFunction::Unit).unwrap();
    let rows = read_rows(&out.join("snapshot_t0.csv"));
    assert_eq!(rows.len(), 64);
    for ((x, u), want_x) in rows.iter().zip(mesh.nodes()) {
        assert_eq!(*x, want_x);
        assert_eq!(*u, u0.evaluate(*x, 0));
    }
}

#[test]
fn effective_config_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = bofem(&[
        "run",
        "--problem",
        "double-soliton",
        "--elements",
        "32",
        "--t-end",
        "6",
        "--snapshots",
        "3,6",
        "--stop-factor",
        "0.001",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = a.join("effective_config.json");
    let o = bofem(&["run", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["effective_config.json", "run.json", "snapshot_t3.csv", "snapshot_t6.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let run: serde_json::Value = serde_json::from_slice(&fs::read(a.join("run.json")).unwrap()).unwrap();
    assert!(run["stats"]["iteration_histogram"].is_object());
    assert!(run["snapshots"][1]["relative_error"].as_f64().unwrap() < 1.0);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"elements": 16, "t_end": 1.0, "weight": "cutoff:3"}"#).unwrap();
    let out = dir.path().join("o");
    let o = bofem(&["run", "--config", cfg.to_str().unwrap(), "--elements", "24", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let eff: serde_json::Value = serde_json::from_slice(&fs::read(out.join("effective_config.json")).unwrap()).unwrap();
    assert_eq!(eff["elements"], 24);
    assert_eq!(eff["t_end"], 1.0);
    assert_eq!(eff["weight"], "cutoff:3");
    assert_eq!(eff["problem"], "periodic-wave");
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(code(&bofem(&["run", "--weight", "quadratic", "--out", out])), 2);
    assert_eq!(code(&bofem(&["run", "--elements", "two", "--out", out])), 2);
    assert_eq!(code(&bofem(&["run", "--elements", "2", "--out", out])), 2);
    assert_eq!(code(&bofem(&["run", "--problem", "custom-initial", "--out", out])), 2);
    assert_eq!(code(&bofem(&["run", "--weight", "linear:1,1", "--out", out])), 2);
    assert_eq!(code(&bofem(&["converge", "--preset", "table2", "--n-list", "16,48", "--out", out])), 2);
    assert_eq!(code(&bofem(&["frobnicate"])), 2);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"elements": 16, "colour": "blue"}"#).unwrap();
    assert_eq!(code(&bofem(&["run", "--config", cfg.to_str().unwrap(), "--out", out])), 2);
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = bofem(&["run", "--elements", "16", "--t-end", "5", "--max-iters", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn custom_initial_data_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u0.csv");
    let mut text = String::from("x,u\n");
    for k in 0..=300 {
        let x = -15.0 + 0.1 * k as f64;
        text.push_str(&format!("{x},{}\n", 0.3 * (std::f64::consts::PI * x / 15.0).cos()));
    }
    fs::write(&csv, text).unwrap();
    let out = dir.path().join("o");
    let o = bofem(&[
        "run",
        "--problem",
        "custom-initial",
        "--initial-csv",
        csv.to_str().unwrap(),
        "--elements",
        "16",
        "--t-end",
        "2",
        "--dump-matrices",
        "--samples-per-element",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_rows(&out.join("snapshot_t2.csv")).len(), 64);
    let mass = fs::read_to_string(out.join("mass.csv")).unwrap();
    assert!(mass.starts_with("row,col,value\n"));
    assert!(out.join("stiffness.csv").exists());
}

#[test]
fn converge_writes_the_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t2");
    let o = bofem(&["converge", "--preset", "table2", "--n-list", "16,32", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("table2.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "N,E,rate");
    assert!(lines[1].starts_with("16,0.15"), "{table}");
    assert!(lines[2].starts_with("32,") && lines[2].ends_with(','));
    for f in ["table2.json", "table2_16.csv", "table2_32.csv", "effective_config.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert_eq!(
        code(&bofem(&["converge", "--preset", "table1", "--n-list", "512,1024", "--out", out.to_str().unwrap()])),
        2
    );
}

#[test]
fn diagnostics_pass_on_a_moderate_mesh() {
    let o = bofem(&["check-operators", "--elements", "32"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    let o = bofem(&["project-test", "--n-list", "16,32"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("N,L2,rate,H1,rate,orthogonality\n16,"));
}
