use std::path::Path;
use std::process::{Command, Output};

fn paracalc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracalc"))
        .arg("--out")
        .arg(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn partition_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = paracalc(dir.path(), &["--grid", "d=1,n=256", "partition-check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("partition.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["deviation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--grid", "d=1,n=1000", "partition-check"][..],
        &["experiment", "th-V9"],
        &["experiment", "th-II2", "--variant", "low"],
        &["--grid", "d=1,n=64", "apply", "--symbol", "nope"],
        &["no-such-command"],
    ] {
        let o = paracalc(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema_version":1,"unknown":true}"#).unwrap();
    let o = paracalc(dir.path(), &["--config", cfg.to_str().unwrap(), "partition-check"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn hypothesis_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = paracalc(
        dir.path(),
        &["--grid", "d=1,n=256", "experiment", "th-II2", "--m1", "-1", "--s", "0.5", "--probes", "2"],
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn experiment_writes_reports_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = paracalc(
        dir.path(),
        &[
            "--grid", "d=1,n=256", "--seed", "5", "experiment", "th-II1", "--id", "act",
            "--sigma1", "a-japanese", "--s", "0.5", "--probes", "3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["json", "csv", "dat", "gp"] {
        assert!(dir.path().join(format!("act.{ext}")).exists(), "{ext}");
    }
    let report = dir.path().join("act.json");
    let r = report.to_str().unwrap();
    assert_eq!(code(&paracalc(dir.path(), &["verify", r])), 0);
    assert_eq!(code(&paracalc(dir.path(), &["verify", "--rerun", r])), 0);

    // a tampered maximum is a numerical contract failure
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let c = v["c_emp"].as_f64().unwrap();
    v["c_emp"] = serde_json::json!(c * 1.5);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_vec(&v).unwrap()).unwrap();
    assert_eq!(code(&paracalc(dir.path(), &["verify", bad.to_str().unwrap()])), 3);

    // a consistent report whose numbers no longer match a fresh run fails --rerun only
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    v["config"]["seed"] = serde_json::json!(6);
    let moved = dir.path().join("moved.json");
    std::fs::write(&moved, serde_json::to_vec(&v).unwrap()).unwrap();
    let m = moved.to_str().unwrap();
    assert_eq!(code(&paracalc(dir.path(), &["verify", m])), 0);
    assert_eq!(code(&paracalc(dir.path(), &["verify", "--rerun", m])), 3);

    assert_eq!(code(&paracalc(dir.path(), &["verify", "/nonexistent/x.json"])), 2);
}

#[test]
fn config_file_runs_every_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{
  "schema_version": 1,
  "grid": {"dim": 1, "n_pts": 128, "period": 100.53096491487338},
  "seed": 3,
  "symbols": {"S": "japanese:m=1"},
  "experiments": [
    {"id": "cal", "theorem": "identity", "probes": 2},
    {"id": "mult", "theorem": "th-II1", "sigma1": "S", "s": 2.0, "probes": 2}
  ]
}"#,
    )
    .unwrap();
    let o = paracalc(dir.path(), &["--config", cfg.to_str().unwrap(), "experiment"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mult: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mult.json")).unwrap()).unwrap();
    assert_eq!(mult["config"]["sigma1"], "japanese:m=1");
    assert!(dir.path().join("cal.json").exists());
}

#[test]
fn sweep_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = paracalc(
        dir.path(),
        &["experiment", "identity", "--id", "sw", "--probes", "2"],
    );
    assert_eq!(code(&o), 0);
    let o = paracalc(
        dir.path(),
        &["--grid", "d=1,n=128", "sweep", "identity", "--id", "sw", "--probes", "2", "--n-pts", "64,128"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".sweep.json"))
        .expect("sweep report");
    assert_eq!(code(&paracalc(dir.path(), &["verify", "--rerun", sweep.to_str().unwrap()])), 0);
}

#[test]
fn decompose_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    let o = paracalc(
        dir.path(),
        &["--grid", "d=1,n=128", "decompose", "--symbol", "a-japanese", "--n-cut", "4,5", "--k-sweep", "1,2"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("a-japanese-K2.pces").exists());
    let o = paracalc(
        dir.path(),
        &["--grid", "d=1,n=128", "decompose", "--symbol", "japanese", "--n-cut", "3"],
    );
    assert_eq!(code(&o), 2);
    let o = paracalc(dir.path(), &["--grid", "d=1,n=128", "apply", "--symbol", "dn", "--stats"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = paracalc(
        dir.path(),
        &["--grid", "d=1,n=128", "commutator", "--sigma1", "japanese", "--sigma2", "func:a", "--n", "1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = paracalc(dir.path(), &["--grid", "d=1,n=128", "seminorms", "--symbol", "a-japanese"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_and_version_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&paracalc(dir.path(), &["--help"])), 0);
    assert_eq!(code(&paracalc(dir.path(), &["--version"])), 0);
}
