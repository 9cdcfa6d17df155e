use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_glbreak"));
    c.env_remove("GLBREAK_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json")
}

/// Mean shift of 1.5 after observation 40 of 80, with a fixed noise pattern.
fn write_series(dir: &Path) -> PathBuf {
    let path = dir.join("series.csv");
    let mut text = String::from("y\n");
    for t in 1..=80u32 {
        let noise = ((t * 7919) % 101) as f64 / 50.0 - 1.0;
        let level = if t > 40 { 1.5 } else { 0.0 };
        text.push_str(&format!("{}\n", level + noise));
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn infer_args(csv: &Path) -> Vec<String> {
    ["infer", csv.to_str().unwrap(), "--paths", "4000", "--seed", "11"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn hdr_dates(v: &Value) -> Vec<u64> {
    v["breaks"][0]["hdr"]["dates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_u64().unwrap())
        .collect()
}

#[test]
fn fit_recovers_the_shift_and_writes_the_profile() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let profile = dir.path().join("profile.csv");
    let out = run(&["fit", csv.to_str().unwrap(), "--profile-out", profile.to_str().unwrap()]);
    let v = stdout_json(&out);
    let date = v["break_dates"][0].as_u64().unwrap();
    assert!(date.abs_diff(40) <= 2, "{date}");
    let text = std::fs::read_to_string(profile).unwrap();
    assert!(text.starts_with("date,q_value,ssr\n"));
}

#[test]
fn infer_is_reproducible_under_a_seed() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let args = infer_args(&csv);
    let a = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let b = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["seed"], 11);
    let pmf: f64 = v["breaks"][0]["pmf"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((pmf - 1.0).abs() < 1e-9);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let out = bin()
        .args(["infer", csv.to_str().unwrap(), "--paths", "2000"])
        .env("GLBREAK_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["seed"], 4242);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let mut args = infer_args(&csv);
    args.extend(["--threads".to_string(), "1".to_string()]);
    let one = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let n = args.len();
    args[n - 1] = "3".into();
    let three = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn wider_alpha_gives_a_nested_hdr() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let mut args = infer_args(&csv);
    args.extend(["--prior".into(), "uniform".into(), "--alpha".into(), "0.05".into()]);
    let wide = hdr_dates(&stdout_json(&run(&args.iter().map(String::as_str).collect::<Vec<_>>())));
    let n = args.len();
    args[n - 1] = "0.10".into();
    let narrow = hdr_dates(&stdout_json(&run(&args.iter().map(String::as_str).collect::<Vec<_>>())));
    assert!(narrow.iter().all(|d| wide.contains(d)), "{narrow:?} vs {wide:?}");
    assert!(narrow.len() <= wide.len());
}

#[test]
fn infer_writes_requested_csv_files() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let pmf = dir.path().join("pmf.csv");
    let prior = dir.path().join("prior.csv");
    let json = dir.path().join("out.json");
    let mut args = infer_args(&csv);
    args.extend([
        "--pmf-out".into(),
        pmf.to_str().unwrap().into(),
        "--prior-out".into(),
        prior.to_str().unwrap().into(),
        "-o".into(),
        json.to_str().unwrap().into(),
    ]);
    let out = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(pmf).unwrap().starts_with("date,pmf\n"));
    assert!(std::fs::read_to_string(prior).unwrap().starts_with("date,prob\n"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["t"], 80);
}

#[test]
fn simulate_limit_reports_quantiles() {
    let dir = TempDir::new().unwrap();
    let draws = dir.path().join("draws.csv");
    let out = run(&[
        "simulate-limit",
        "--paths",
        "2000",
        "--seed",
        "5",
        "--draws-out",
        draws.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert!(v.to_string().contains("quantiles"));
    assert_eq!(std::fs::read_to_string(draws).unwrap().lines().count(), 2001);
}

#[test]
fn mc_table_writes_csv_rows() {
    let out = run(&["mc-table", "--table", "4", "--reps", "20", "--bank-paths", "500", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("model,lambda0,delta0,method,metric,value,mc_se,n_reps,seed\n"));
    assert!(text.contains("M1,0.5,0.4,GL-LN,Cov,"));
}

#[test]
fn dumped_config_runs_identically() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let mut args = infer_args(&csv);
    let direct = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    args.push("--dump-config".into());
    let dumped = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(dumped.status.success());
    let config = dir.path().join("run.toml");
    std::fs::write(&config, &dumped.stdout).unwrap();
    let replay = run(&["run", config.to_str().unwrap()]);
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(direct.stdout, replay.stdout);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = TempDir::new().unwrap();
    let csv = write_series(dir.path());
    let csv = csv.to_str().unwrap();

    assert_eq!(run(&["fit", csv]).status.code(), Some(0));
    // Usage errors.
    assert_eq!(run(&["fit"]).status.code(), Some(2));
    assert_eq!(run(&["infer", csv, "--loss", "bogus"]).status.code(), Some(2));
    // Unreadable or malformed input.
    assert_eq!(run(&["fit", "/nonexistent/file.csv"]).status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y\n1\nabc\n").unwrap();
    let out = run(&["fit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    // Too many breaks for the sample.
    assert_eq!(run(&["fit", csv, "-m", "8", "--trimming", "0.2"]).status.code(), Some(3));
}
