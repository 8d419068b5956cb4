use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lrfsim"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(format!("{name}.json"))
}

fn lrfsim(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Copy of a bundled scenario with some fields replaced.
fn variant(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenario(name)).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.join(format!("{name}_variant.json"));
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn run_fig14_writes_outputs_and_locks_on() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lrfsim(&["run", "--scenario", scenario("fig14_locking").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["samples.jsonl", "passes.jsonl", "track.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("map.bin").exists());
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let modes: Vec<&str> = summary["timeline"].as_array().unwrap().iter().map(|s| s["mode"].as_str().unwrap()).collect();
    assert_eq!(&modes[..2], ["normal", "locking"]);
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["stats"]["target_lost"], 0);
    assert_eq!(summary["containment"]["ratio"], 1.0);
    let track = std::fs::read_to_string(out.join("track.csv")).unwrap();
    assert!(track.starts_with("t,x,y,z,psi_a_deg,psi_b_deg,range_deg,deflection_deg\n"));
}

#[test]
fn missing_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = lrfsim(&["run", "--scenario", "/nonexistent/scenario.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_error_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = variant(dir.path(), "fig14_locking", |v| {
        v["group"]["max_range"] = Value::String("far".into());
    });
    let o = lrfsim(&["run", "--scenario", p.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("group.max_range") && err.contains("line"), "{err}");

    let p = variant(dir.path(), "fig14_locking", |v| {
        v["step_dt"] = Value::from(-1.0);
    });
    let o = lrfsim(&["run", "--scenario", p.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step_dt"));
}

#[test]
fn seed_changes_noise_but_not_noiseless_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let short = |sigma: f64| {
        move |v: &mut Value| {
            v["duration"] = Value::from(0.5);
            v["group"]["sigma"] = Value::from(sigma);
        }
    };
    let run = |p: &Path, seed: &str, tag: &str| {
        let out = dir.path().join(tag);
        let o = lrfsim(&["run", "--scenario", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        std::fs::read(out.join("samples.jsonl")).unwrap()
    };
    let noiseless = variant(dir.path(), "fig14_locking", short(0.0));
    assert_eq!(run(&noiseless, "1", "a"), run(&noiseless, "2", "b"));
    let noisy = variant(dir.path(), "fusion_bench", short(0.05));
    assert_ne!(run(&noisy, "1", "c"), run(&noisy, "2", "d"));
    assert_eq!(run(&noisy, "3", "e"), run(&noisy, "3", "f"));
}

#[test]
fn map_storage_override_writes_a_loadable_map() {
    let dir = tempfile::tempdir().unwrap();
    let p = variant(dir.path(), "fusion_bench", |v| v["duration"] = Value::from(0.2));
    let out = dir.path().join("o");
    let o = lrfsim(&["run", "--scenario", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--storage", "map", "--resolution-deg", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let map = lrfsim::storage::load_map(&out.join("map.bin")).unwrap();
    assert!(map.cells().iter().any(|c| c.hits > 0));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(out.join("map.json")).unwrap()).unwrap();
    assert_eq!(sidecar["version"], 1);
}

#[test]
fn several_scenarios_run_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let a = variant(dir.path(), "fusion_bench", |v| v["duration"] = Value::from(0.2));
    let b = variant(dir.path(), "fig14_locking", |v| v["duration"] = Value::from(0.2));
    let out = dir.path().join("o");
    let o = lrfsim(&["run", "--scenario", a.to_str().unwrap(), b.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("fusion_bench/summary.json").exists());
    assert!(out.join("fig14_locking/summary.json").exists());
}

fn convert(args: &[&str]) -> Vec<f64> {
    let mut full = vec!["convert"];
    full.extend_from_slice(args);
    let o = lrfsim(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).split_whitespace().map(|t| t.parse().unwrap()).collect()
}

#[test]
fn convert_identity_body_to_global_echoes() {
    let p = convert(&["--theta-g-deg", "0", "--origin", "0,0,0", "--from", "body", "--to", "global", "--point", "1.5,-2,0.25"]);
    assert_eq!(p, vec![1.5, -2.0, 0.25]);
}

#[test]
fn convert_round_trip_through_two_invocations() {
    let frame = ["--theta-g-deg", "37.5", "--origin", "3,-1,0.2", "--robot", "0.4,1.1,0", "--mount", "0,0.2,1"];
    let mut a: Vec<&str> = frame.to_vec();
    a.extend(["--from", "global", "--to", "spherical", "--point", "4.25,-7.5,1.3"]);
    let s = convert(&a);
    let point = format!("{},{},{}", s[0], s[1], s[2]);
    let mut b: Vec<&str> = frame.to_vec();
    b.extend(["--from", "spherical", "--to", "global", "--point", &point]);
    let g = convert(&b);
    for (x, y) in g.iter().zip([4.25, -7.5, 1.3]) {
        assert!((x - y).abs() < 1e-9, "{g:?}");
    }
}

#[test]
fn convert_zenith_point_has_theta_zero() {
    let s = convert(&["--theta-g-deg", "20", "--from", "body", "--to", "spherical", "--point", "0,0.2,3", "--mount", "0,0.2,1"]);
    assert_eq!(s, vec![2.0, 0.0, 0.0]);
}

#[test]
fn convert_prints_twelve_significant_digits() {
    let o = lrfsim(&["convert", "--theta-g-deg", "0", "--from", "body", "--to", "global", "--point", "0.123456789012345,1,2"]);
    assert_eq!(stdout(&o).trim(), "0.123456789012 1 2");
}

#[test]
fn convert_malformed_point_exits_2() {
    let o = lrfsim(&["convert", "--theta-g-deg", "0", "--from", "body", "--to", "global", "--point", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lrfsim(&["convert", "--theta-g-deg", "0", "--from", "body", "--to", "cylindrical", "--point", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_vectors() {
    let o = lrfsim(&["oracle", "--kind", "intervals", "--disk", "0,3,0.25"]);
    assert!(o.status.success());
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    let analytic = lines[0]["analytic_range_deg"].as_f64().unwrap();
    assert!((lines[0]["range_deg"].as_f64().unwrap() - analytic).abs() <= 2.0 * 0.0625);

    let o = lrfsim(&["oracle", "--kind", "raycast"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["distance"], 4.0);

    let o = lrfsim(&["oracle", "--kind", "fusion", "--pairs", "2000"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["pairs"], 2000);
    assert_eq!(stdout(&o), stdout(&lrfsim(&["oracle", "--kind", "fusion", "--pairs", "2000"])));
}

#[test]
fn unknown_oracle_kind_exits_2() {
    assert_eq!(lrfsim(&["oracle", "--kind", "teleport"]).status.code(), Some(2));
}
