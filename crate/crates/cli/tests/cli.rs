use std::process::{Command, Output};

fn parafield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parafield")).args(args).env_remove("PARAFIELD_CAP").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "command,p,m,n,exponent_p,exponent_q,strategy,seed,budget,metric_name,metric_value,verdict";

#[test]
fn lemma2_exhaustive_over_f3_passes() {
    let o = parafield(&["verify", "lemma2", "--p", "3", "--n", "3", "--mode", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some(HEADER));
    assert!(out.contains("worst_ratio"));
    assert!(!out.contains(",fail"));
}

#[test]
fn lemma2_over_f5_is_a_configuration_error() {
    let o = parafield(&["verify", "lemma2", "--p", "5", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("square"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(parafield(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(parafield(&["verify", "no-such-check", "--p", "3"]).status.code(), Some(2));
    assert_eq!(parafield(&["field-info", "--p", "9"]).status.code(), Some(2));
    assert_eq!(parafield(&["estimate-constant", "--p", "3", "--pair", "8/5"]).status.code(), Some(2));
    assert_eq!(parafield(&["estimate-constant", "--p", "7", "--n", "3", "--budget", "10"]).status.code(), Some(2));
}

#[test]
fn paper_constant_flags_discrepancy() {
    let o = parafield(&["paper-constant"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let value: f64 = out
        .lines()
        .find(|l| l.contains(",formula_value,"))
        .and_then(|l| l.split(',').nth(10))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 23.611).abs() < 1e-3);
    assert!(out.contains("discrepancy,1.0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("6"));
}

#[test]
fn same_config_gives_identical_bytes() {
    let runs: [&[&str]; 4] = [
        &["verify", "bilinear-identity", "--p", "3", "--n", "3", "--trials", "10", "--seed", "5", "--format", "json"],
        &["estimate-constant", "--p", "3", "--n", "3", "--strategy", "local_search", "--budget", "300", "--seed", "2"],
        &["energy", "--p", "3", "--n", "3", "--trials", "4", "--seed", "9"],
        &["scan-fields", "--primes", "3,7", "--strategy", "random_char", "--budget", "100"],
    ];
    for args in runs {
        let a = parafield(args);
        let b = parafield(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["verify", "lemma2", "--p", "7", "--n", "3", "--trials", "200", "--format", "json"];
    let one = parafield(&[&args[..], &["--threads", "1"]].concat());
    let two = parafield(&[&args[..], &["--threads", "2"]].concat());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn output_file_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("search.json");
    let p = path.to_str().unwrap();
    let o = parafield(&["estimate-constant", "--p", "3", "--n", "3", "--format", "json", "--output", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r = parafield(&["verify", "--replay", p]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("replay estimate-constant"));
}

#[test]
fn tampered_witness_replays_as_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("search.json");
    let p = path.to_str().unwrap();
    let o = parafield(&["estimate-constant", "--p", "3", "--n", "3", "--format", "json", "--output", p]);
    assert_eq!(o.status.code(), Some(0));
    let mut report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    report["witness"]["encodings"]["best_ratio"] = "2.5".into();
    std::fs::write(&path, serde_json::to_string(&report["witness"]).unwrap()).unwrap();
    let r = parafield(&["verify", "--replay", p, "--format", "json"]);
    assert_eq!(r.status.code(), Some(1));
    let out: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(out["witness"]["check"], "estimate-constant");
    assert!(out["witness"]["detail"].as_str().unwrap().contains("recorded=2.5"));
}

#[test]
fn field_info_lists_modulus() {
    let o = parafield(&["field-info", "--p", "3", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains(",order,9.0,"));
    assert!(out.contains("modulus_x2,1.0"));
}

#[test]
fn cap_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_parafield"))
        .args(["field-info", "--p", "7", "--m", "2"])
        .env("PARAFIELD_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
