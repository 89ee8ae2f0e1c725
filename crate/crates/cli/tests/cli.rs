use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracbarrier_cli::ScenarioConfig;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracbarrier-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracbarrier"));
    cmd.args(args).env_remove("FRACBARRIER_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("input.toml");
    fs::write(&p, text).unwrap();
    p
}

fn certificate<'a>(rep: &'a Value, scenario: &str, name: &str) -> &'a Value {
    rep["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["scenario"] == scenario)
        .and_then(|r| r["certificates"].as_array().unwrap().iter().find(|c| c["name"] == name))
        .unwrap_or_else(|| panic!("no certificate {scenario}/{name}"))
}

#[test]
fn verify_all_reference_passes_and_lists_every_certificate() {
    let out = scratch("verify-all");
    let o = run(&["verify-all", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = report(&out);
    assert_eq!(rep["schema"], "fracbarrier-report");
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["all_pass"], true);
    let scenarios: Vec<&str> = rep["results"].as_array().unwrap().iter().map(|r| r["scenario"].as_str().unwrap()).collect();
    assert_eq!(scenarios, ["barriers", "elliptic", "parabolic", "asymptotic"]);
    let mut count = 0;
    for r in rep["results"].as_array().unwrap() {
        for c in r["certificates"].as_array().unwrap() {
            let mut keys: Vec<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
            keys.sort();
            assert_eq!(keys, ["name", "pass", "relation", "threshold", "value"]);
            assert_eq!(c["pass"], true, "{c}");
            count += 1;
        }
    }
    assert_eq!(rep["certificate_count"], count);
    for slack in ["lower", "upper", "derivative", "crossing_slope", "inner", "outer"] {
        assert!(certificate(&rep, "barriers", &format!("slack_{slack}"))["value"].as_f64().unwrap() > 0.0);
    }
    for file in [
        "report.txt",
        "certificates.csv",
        "config.toml",
        "barriers_profiles.csv",
        "elliptic_solution.csv",
        "parabolic_trajectory.csv",
        "asymptotic_profiles.csv",
        "barriers_profiles.svg",
        "elliptic_trace.svg",
        "parabolic_envelope.svg",
        "asymptotic_trace.svg",
    ] {
        assert!(out.join(file).is_file(), "{file} missing");
    }
    let header = fs::read_to_string(out.join("parabolic_trajectory.csv")).unwrap();
    assert!(header.starts_with("t,x,u\n"));
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn identical_runs_are_byte_identical_with_or_without_parallelism() {
    let (a, b) = (scratch("stable-a"), scratch("stable-b"));
    let cfg = write_config(&a, "levels = 3\nhorizon = 20.0\ncheckpoints = [10.0, 20.0]\n");
    let cfg = cfg.to_str().unwrap();
    assert!(run(&["verify-all", "--config", cfg, "--out", a.to_str().unwrap()], &[]).status.success());
    assert!(run(&["verify-all", "--config", cfg, "--out", b.to_str().unwrap(), "--parallel"], &[]).status.success());
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names.iter().filter(|n| *n != "input.toml") {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?} differs");
    }
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}

#[test]
fn positive_reaction_with_infinite_horizon_is_a_config_error() {
    let dir = scratch("c-positive");
    let cfg = write_config(&dir, "reaction = \"constant\"\nreaction_value = 0.2\ninfinite_horizon = true\n");
    let o = run(&["parabolic", "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`reaction_value`") && err.contains("c ≤ 0"), "{err}");
    assert!(!dir.join("out").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn constant_elliptic_case_reports_exact_solution() {
    let dir = scratch("gamma-one");
    let cfg = write_config(&dir, "gamma = 1.0\nsource = \"zero\"\nreaction = \"zero\"\nlevels = 3\n");
    let o = run(&["elliptic", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = report(&dir);
    let values = &rep["results"][0]["values"];
    assert!(values["sup_abs_u_minus_gamma"].as_f64().unwrap() <= 1e-10);
    assert!(certificate(&rep, "elliptic", "discrete_residual")["value"].as_f64().unwrap() <= 1e-10);
    for line in fs::read_to_string(dir.join("elliptic_solution.csv")).unwrap().lines().skip(1) {
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((u - 1.0).abs() <= 1e-10);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn failing_certificate_gives_nonzero_exit_naming_it() {
    let dir = scratch("tight-tol");
    let cfg = write_config(&dir, "levels = 3\n");
    let o = run(&["elliptic", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--tol", "1e-9"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("certificate failed: elliptic/nested_limit_tolerance"), "{err}");
    let rep = report(&dir);
    assert_eq!(rep["all_pass"], false);
    assert_eq!(rep["failed"][0], "elliptic/nested_limit_tolerance");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn environment_sets_default_output_directory() {
    let dir = scratch("env");
    let target = dir.join("from-env");
    let o = run(&["barriers"], &[("FRACBARRIER_OUT", &target)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(target.join("report.json").is_file());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn written_config_reloads_to_the_same_scenario() {
    let dir = scratch("round-trip");
    let first = dir.join("first");
    let cfg = write_config(&dir, "boundary = \"sin-decay\"\nlevels = 3\ntol = 0.01\n");
    assert!(run(&["elliptic", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()], &[]).status.success());
    let written = first.join("config.toml");
    let original = ScenarioConfig::load(&cfg).map(|mut c| {
        c.scenario = fracbarrier_cli::ScenarioKind::Elliptic;
        c
    });
    assert_eq!(ScenarioConfig::load(&written).unwrap(), original.unwrap());
    let second = dir.join("second");
    assert!(run(&["elliptic", "--config", written.to_str().unwrap(), "--out", second.to_str().unwrap()], &[]).status.success());
    assert_eq!(fs::read(first.join("report.json")).unwrap(), fs::read(second.join("report.json")).unwrap());
    assert_eq!(fs::read(&written).unwrap(), fs::read(second.join("config.toml")).unwrap());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unwritable_output_directory_fails() {
    let dir = scratch("blocked");
    let blocker = dir.join("file");
    fs::write(&blocker, b"x").unwrap();
    let o = run(&["barriers", "--out", blocker.join("sub").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    let _ = fs::remove_dir_all(&dir);
}
