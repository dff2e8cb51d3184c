use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dsy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsy")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn zeta_report_schema_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tables");
    let out = dsy(&["zeta", "--model", "yule", "--n", "25", "--trials", "200", "--seed", "7", "--csv", csv.to_str().unwrap()]);
    let r = report(&out);
    for key in ["command", "config", "toolkit_version", "results", "diagnostics"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["command"], "zeta");
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["results"]["censored"], 0);
    let speed = f(&r["diagnostics"]["fpp_speed"]);
    assert!((speed - 0.2320).abs() < 1e-4, "{speed}");

    let text = std::fs::read_to_string(csv.join("zeta.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,n,zeta_n"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 200 * 25);
    // shortest round-trip floats
    for r in &rows {
        let v: f64 = r[2].parse().unwrap();
        assert_eq!(format!("{v:?}"), r[2]);
    }
    let mean: f64 = rows.iter().filter(|r| r[1] == "25").map(|r| r[2].parse::<f64>().unwrap() / 25.0).sum::<f64>() / 200.0;
    assert!((mean - f(&r["results"]["mean_zeta_n_over_n"])).abs() < 1e-12);
}

#[test]
fn kernel_check_kpp() {
    let r = report(&dsy(&["kernel-check", "--model", "kpp", "--grid", "-6:6:1201", "--seed", "1"]));
    assert!(f(&r["results"]["detailed_balance_residual"]) < 1e-12);
    assert!(f(&r["results"]["convolution_identity_error"]) < 1e-4);
    assert_eq!(r["results"]["states"], 1201);
}

#[test]
fn spectral_auto_bessel() {
    let r = report(&dsy(&["spectral", "--model", "bessel", "--a", "auto", "--seed", "1"]));
    assert_eq!(r["verdict"], "passes");
    assert_eq!(r["results"]["found"], true);
    assert!(f(&r["results"]["norm"]) < 0.5 - f(&r["results"]["margin"]));
}

#[test]
fn pairs_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsy(&[
        "criterion", "--model", "mean-field", "--law", "point:1", "--method", "pair_sequence", "--a", "2", "--n", "12",
        "--seed", "1", "--csv", dir.path().to_str().unwrap(),
    ]);
    let r = report(&out);
    assert_eq!(r["verdict"], "passes");
    let text = std::fs::read_to_string(dir.path().join("pairs.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("n,pair_value,nth_root"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn exit_codes() {
    assert_eq!(dsy(&["zeta", "--model", "nope", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(dsy(&["zeta", "--budget", "-5", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(dsy(&["frobnicate"]).status.code(), Some(2));
    // seedless runs are fine unless strict
    assert_eq!(dsy(&["zeta", "--n", "3", "--trials", "2"]).status.code(), Some(0));
    assert_eq!(dsy(&["zeta", "--n", "3", "--trials", "2", "--strict"]).status.code(), Some(2));
    // the grid misses most of the invariant mass
    let out = dsy(&["spectral", "--model", "kpp", "--grid", "-1:1:21", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let strict = ["criterion", "--model", "mean-field", "--a", "1", "--seed", "1", "--strict"];
    assert_eq!(dsy(&strict).status.code(), Some(4));
    assert_eq!(dsy(&strict[..7]).status.code(), Some(0));
}

#[test]
fn seed_is_recorded_when_drawn() {
    let r = report(&dsy(&["zeta", "--n", "3", "--trials", "2"]));
    assert!(r["config"]["seed"].as_u64().is_some());
}

#[test]
fn config_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let args = ["simulate", "--model", "bessel", "--t", "1.5", "--trials", "30", "--budget", "1e5", "--seed", "4"];
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["--out", first.to_str().unwrap()]);
    assert!(dsy(&a).status.success());
    // different thread count and output path, same report
    let out = dsy(&["simulate", "--config", first.to_str().unwrap(), "--threads", "3", "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    // the bare config object works too
    let r: Value = serde_json::from_slice(&std::fs::read(&first).unwrap()).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, serde_json::to_string(&r["config"]).unwrap()).unwrap();
    let third = report(&dsy(&["simulate", "--config", cfg.to_str().unwrap()]));
    assert_eq!(third, r);
}

#[test]
fn text_config_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "seed = 3\n[model]\nname = birth-death\nbetas = geometric:1/2\nj = 30\n[run]\na = 2 # damping\n").unwrap();
    let r = report(&dsy(&["spectral", "--config", path.to_str().unwrap(), "--a", "4"]));
    assert_eq!(r["config"]["model"]["betas"], "geometric:1/2");
    assert_eq!(r["config"]["run"]["a"], "4");
    assert_eq!(r["config"]["seed"], 3);
    let r2 = report(&dsy(&["spectral", "--config", path.to_str().unwrap(), "--set", "run.a=4"]));
    assert_eq!(r, r2);
}

#[test]
fn threads_do_not_change_results() {
    let base = ["explosion", "--model", "alpha", "--alpha", "0.5", "--t", "2", "--budget", "5000", "--trials", "40", "--seed", "9"];
    let one = dsy(&[&base[..], &["--threads", "1"]].concat());
    let three = dsy(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(report(&one), report(&three));
}

#[test]
fn reproduce_matches_golden_reports() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for example in ["birth-death", "bessel", "mean-field", "kpp"] {
        let out = dsy(&["reproduce", example]);
        assert!(out.status.success(), "{example}: {}", String::from_utf8_lossy(&out.stderr));
        let want = std::fs::read_to_string(golden.join(format!("{example}.json"))).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), want, "{example}");
    }
}
