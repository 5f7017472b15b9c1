use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_potwalk"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    status.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn phase_reports_regimes_in_one_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run("phase", &configs().join("default.json"), tmp.path(), &[]), 0);
    let csv = fs::read_to_string(tmp.path().join("phase.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "h,dual0,regime,lambda_h,free_energy");
    let regimes: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(regimes, ["sub-ballistic", "sub-ballistic", "ballistic", "ballistic", "ballistic"]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("phase.json")).unwrap()).unwrap();
    assert_eq!(json["format_version"], 1);
    assert_eq!(json["reports"].as_array().unwrap().len(), 5);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert!(report["defaults_applied"].as_array().unwrap().iter().any(|d| d == "budgets"));
    assert_eq!(report["config"]["budgets"]["n_max"], 8);
}

#[test]
fn csv_headers_follow_the_declared_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.json");
    let cases = [
        ("two-point", "two_point.csv", "d,lambda,x,potential_spec,horizon,lower,upper,width,flag"),
        ("lyapunov", "lyapunov.csv", "setting,d,lambda,direction,n,lower,upper,mean,se,flag"),
        ("partition", "partition.csv", "setting,d,n,h,Z_log_over_n,mean_speed,event,event_log_prob_over_n"),
        ("scan", "scan.csv", "setting,d,n,h,Z_log_over_n,mean_speed,event,event_log_prob_over_n"),
    ];
    for (sub, file, header) in cases {
        let out = tmp.path().join(sub);
        assert_eq!(run(sub, &cfg, &out, &[]), 0, "{sub}");
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
    }
    let models: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("lyapunov/norm_models.json")).unwrap()).unwrap();
    let first = &models["lower"][0];
    for key in ["lambda", "directions", "values", "version"] {
        assert!(first.get(key).is_some(), "norm model lacks {key}");
    }
}

#[test]
fn field_is_reproducible_from_its_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("quenched_2d.json");
    assert_eq!(run("field", &cfg, &tmp.path().join("a"), &[]), 0);
    assert_eq!(run("field", &cfg, &tmp.path().join("b"), &[]), 0);
    let a = fs::read(tmp.path().join("a/field.json")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b/field.json")).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["header"]["seed"], 7);
    assert_eq!(json["derived"]["reproducible"], true);
    assert_eq!(run("field", &cfg, &tmp.path().join("c"), &["--seed", "8"]), 0);
    assert_ne!(a, fs::read(tmp.path().join("c/field.json")).unwrap());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.json", r#"{ "dimension": 1, "setting": "annealed", "lambda_grid": "default", "phi": { "kind": "capped", "c": -1.0, "cap": 2.0 } }"#);
    assert_eq!(run("two-point", &bad, &tmp.path().join("o"), &[]), 1);
    let budget = write(
        tmp.path(),
        "budget.json",
        r#"{ "dimension": 2, "setting": "annealed", "lambda_grid": "default", "phi": { "kind": "hard_obstacle", "gamma": 1.0 },
            "drifts": [[0.1, 0.1]], "ns": [30] }"#,
    );
    assert_eq!(run("partition", &budget, &tmp.path().join("o"), &[]), 2);
    assert_eq!(run("two-point", &tmp.path().join("missing.json"), &tmp.path().join("o"), &[]), 1);
    assert_eq!(bin().arg("nonsense").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn partial_results_are_written_with_flags() {
    let tmp = tempfile::tempdir().unwrap();
    // x = 0.999 needs λ far beyond a grid that stops at 1
    let cfg = write(
        tmp.path(),
        "short.json",
        r#"{ "dimension": 1, "setting": "annealed", "lambda_grid": [0.0, 0.5, 1.0], "phi": { "kind": "hard_obstacle", "gamma": 1.0 },
            "velocities": [[0.2], [0.999]] }"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(run("rate", &cfg, &out, &[]), 1);
    let csv = fs::read_to_string(out.join("rate.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].ends_with(",ok"), "{csv}");
    assert!(rows[2].ends_with(",error:grid_too_short"), "{csv}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["row_errors"][0]["at"], "velocities[1]");
}

#[test]
fn thread_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (cfg, sub) in [("default.json", "two-point"), ("default.json", "scan"), ("quenched_2d.json", "lyapunov"), ("quenched_2d.json", "partition")] {
        let one = tmp.path().join(format!("{sub}-1"));
        let eight = tmp.path().join(format!("{sub}-8"));
        assert_eq!(run(sub, &configs().join(cfg), &one, &["--threads", "1"]), 0);
        assert_eq!(run(sub, &configs().join(cfg), &eight, &["--threads", "8"]), 0);
        for entry in fs::read_dir(&one).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(fs::read(one.join(&name)).unwrap(), fs::read(eight.join(&name)).unwrap(), "{sub}/{name:?}");
        }
    }
}
