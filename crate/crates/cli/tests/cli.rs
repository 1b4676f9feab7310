use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aanse(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aanse"))
        .args(args)
        .current_dir(cwd)
        .env_remove("AANSE_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn cavity_solve_converges_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(
        &["solve", "--problem", "cavity2d", "--n", "16", "--re", "100", "--m", "2", "--output-dir", "out"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("out/cavity2d_re100_m2");
    for f in ["trace.json", "summary.json", "config.json", "series_index.csv", "000_cavity2d_re100_m2.csv"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    assert!(stdout(&o).contains("Converged"));
}

#[test]
fn invalid_reynolds_number_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(&["solve", "--re", "-5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Reynolds"), "{}", stderr(&o));
}

#[test]
fn exit_codes_follow_termination_status() {
    let dir = tempfile::tempdir().unwrap();
    let capped = aanse(
        &["solve", "--problem", "linear-synthetic", "--n", "8", "--max-iters", "3", "--output-dir", "o"],
        dir.path(),
    );
    assert_eq!(capped.status.code(), Some(2), "{}", stderr(&capped));
    let newton = aanse(
        &["solve", "--n", "16", "--re", "5000", "--newton", "--max-iters", "50", "--output-dir", "o"],
        dir.path(),
    );
    assert_eq!(newton.status.code(), Some(3), "{}", stdout(&newton));
}

#[test]
fn echoed_config_reproduces_the_trace_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--n", "6", "--re", "50", "--m", "1", "--no-timings", "--output-dir", "a"];
    assert_eq!(aanse(&args, dir.path()).status.code(), Some(0));
    let run_a = dir.path().join("a/cavity2d_re50_m1");
    let echoed = run_a.join("config.json");
    let o = aanse(
        &["solve", "--config", echoed.to_str().unwrap(), "--output-dir", "b"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run_b = dir.path().join("b/cavity2d_re50_m1");
    assert_eq!(fs::read(run_a.join("trace.json")).unwrap(), fs::read(run_b.join("trace.json")).unwrap());

    let mut a: serde_json::Value = serde_json::from_slice(&fs::read(&echoed).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&fs::read(run_b.join("config.json")).unwrap()).unwrap();
    a["output_dir"] = b["output_dir"].clone();
    assert_eq!(a, b);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"problem": "linear-synthetic", "n": 4, "depths": [3], "contraction": 0.5}"#,
    )
    .unwrap();
    let o = aanse(&["solve", "--config", "c.json", "--n", "7", "--output-dir", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("o/synthetic_r0.5_m3/config.json")).unwrap()).unwrap();
    assert_eq!(cfg["n"], 7);
    assert_eq!(cfg["depths"], serde_json::json!([3]));

    fs::write(dir.path().join("bad.json"), r#"{"depth": 3}"#).unwrap();
    let o = aanse(&["solve", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_root_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_aanse"))
        .args(["solve", "--problem", "linear-synthetic", "--n", "5"])
        .current_dir(dir.path())
        .env("AANSE_OUTPUT_DIR", "from_env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from_env/synthetic_r0.9_m0/trace.json").exists());
}

#[test]
fn sweep_pairs_a_depth_zero_run_and_plots_each_reynolds_number() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(
        &["sweep", "--n", "4", "--re", "10,100", "--m", "1,2", "--jobs", "2", "--output-dir", "s"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let root = dir.path().join("s");
    let summaries: serde_json::Value = serde_json::from_slice(&fs::read(root.join("summary.json")).unwrap()).unwrap();
    let rows = summaries.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    // every row's predicted rate uses the paired depth-0 rate at its Re
    for row in rows {
        let predicted = row["predicted_rate"].as_f64().unwrap();
        let reference = rows
            .iter()
            .find(|r| r["params"]["re"] == row["params"]["re"] && r["config"]["depth_m"] == 0)
            .unwrap()["conv_rate_median"]
            .as_f64()
            .unwrap();
        let theta = row["theta_median"].as_f64().unwrap();
        assert!((predicted - theta * reference).abs() <= 1e-15 * reference, "{row}");
    }
    let panels: Vec<_> = fs::read_dir(root.join("plots"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("panel_"))
        .collect();
    assert_eq!(panels.len(), 2);
    assert!(stdout(&o).lines().filter(|l| l.starts_with("cavity2d_")).count() == 6);
}

#[test]
fn single_cell_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--n", "5", "--re", "20", "--m", "0", "--no-timings"];
    let solve: Vec<&str> = ["solve"].into_iter().chain(common).chain(["--output-dir", "a"]).collect();
    let sweep: Vec<&str> = ["sweep"].into_iter().chain(common).chain(["--output-dir", "b"]).collect();
    assert_eq!(aanse(&solve, dir.path()).status.code(), Some(0));
    assert_eq!(aanse(&sweep, dir.path()).status.code(), Some(0));
    let file = "cavity2d_re20_m0/trace.json";
    assert_eq!(
        fs::read(dir.path().join("a").join(file)).unwrap(),
        fs::read(dir.path().join("b").join(file)).unwrap()
    );
}

#[test]
fn quick_verify_passes_and_fault_injection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = aanse(&["verify", "--level", "quick"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(!stdout(&ok).contains("[FAIL]"));
    let bad = aanse(&["verify", "--level", "quick", "--fault-injection"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("skew-symmetric"), "{}", stderr(&bad));
}

#[test]
fn audit_of_a_plain_contraction_trace_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(
        &["solve", "--problem", "linear-synthetic", "--n", "10", "--contraction", "0.8", "--output-dir", "o"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let a = aanse(&["audit", "o/synthetic_r0.8_m0/trace.json", "--r", "0.8"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert!(stdout(&a).contains(" 0 violated"), "{}", stdout(&a));
}

#[test]
fn audit_prints_the_threshold_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(&["audit", "--r", "0.9", "--eta", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for line in ["  1   1     0.888889", "  1   2     0.800000", "  2   3     0.620000"] {
        assert!(out.contains(line), "missing {line:?} in\n{out}");
    }
}

#[test]
fn audit_of_a_missing_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = aanse(&["audit", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    fs::write(dir.path().join("junk.json"), "{").unwrap();
    assert_eq!(aanse(&["audit", "junk.json"], dir.path()).status.code(), Some(1));
}
