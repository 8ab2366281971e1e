use std::process::{Command, Output};

use serde_json::Value;

fn surfmaps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfmaps"))
        .args(args)
        .env_remove("SURFMAPS_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn has_float(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_f64(),
        Value::Array(a) => a.iter().any(has_float),
        Value::Object(o) => o.values().any(has_float),
        _ => false,
    }
}

#[test]
fn tau_json_lists_rationals() {
    let o = surfmaps(&["tau", "--max-g", "5", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    let tau: Vec<String> = v["tau"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    assert_eq!(tau.len(), 6);
    assert_eq!(&tau[..4], ["-1/1", "1/3", "49/18", "2450/27"]);
    let lib: Vec<String> = surfmaps::constants::tau_sequence(5).iter().map(surfmaps::rational::to_pq).collect();
    assert_eq!(tau, lib);
    assert_eq!(v["t"][1]["coeff"], "1/24");
    assert_eq!(v["t"][1]["sqrt_pi_exp"], 0);
    assert_eq!(v["t"][2]["coeff"], "7/4320");
    assert_eq!(v["t"][2]["sqrt_pi_exp"], -1);
    assert!(!has_float(&v));
}

#[test]
fn tau_csv() {
    let o = surfmaps(&["tau", "--max-g", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("tau"));
    assert!(lines[2].contains("1/3"));
}

#[test]
fn eliminate_prints_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("terms.txt");
    let o = surfmaps(&["eliminate", "--derive", "--dump-terms", dump.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().any(|l| l == "residual: 0"), "{out}");
    let file = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(file.lines().last(), Some("residual: 0"));
    assert!(file.starts_with("U2 = "));
    assert_eq!(code(&surfmaps(&["eliminate"])), 2);
}

#[test]
fn eliminate_json() {
    let o = surfmaps(&["eliminate", "--derive", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["residual"], "0");
    assert_eq!(v["solved"].as_array().unwrap().len(), 4);
}

#[test]
fn series_verify() {
    let o = surfmaps(&["series", "verify", "--which", "ode", "--order", "20"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["rows"][0]["zero"], true);
    let o = surfmaps(&["series", "verify", "--order", "15"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_tutte_passes() {
    let o = surfmaps(&["verify", "tutte", "--max-edges", "5", "--genus-target", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert!(!has_float(&v));
}

#[test]
fn verify_tutte_rejects_genus_zero() {
    let o = surfmaps(&["verify", "tutte", "--max-edges", "3", "--genus-target", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_cases_reports_the_literal_check() {
    let o = surfmaps(&["verify", "cases", "--max-edges", "6"]);
    let v = json(&o);
    // the printed product formula disagrees at five edges; the
    // degree-two version agrees
    assert_eq!(code(&o), 1);
    assert_eq!(v["passed"], false);
    assert_eq!(v["two_components_exact_holds"], true);
    assert_eq!(v["three_components_hold"], true);
    assert!(!has_float(&v));
}

#[test]
fn verify_bijections_ms() {
    let o = surfmaps(&["verify", "bijections", "--max-edges", "3", "--genus", "0", "--which", "ms"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["ms"].as_array().unwrap();
    let images: Vec<u64> = rows.iter().map(|r| r["distinct_outputs"].as_u64().unwrap()).collect();
    assert_eq!(images, vec![6, 36, 270]);
}

#[test]
fn verify_bijections_miermont_csv() {
    let o = surfmaps(&[
        "verify", "bijections", "--max-edges", "2", "--genus", "0", "--which", "miermont", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn enumerate_counts() {
    let v = json(&surfmaps(&["enumerate", "--edges", "3", "--genus", "1"]));
    assert_eq!(v["one_face_maps"], 10);
    assert_eq!(v["rooted_maps"], 20);
    let v = json(&surfmaps(&["enumerate", "--edges", "2", "--genus", "0", "--labelled"]));
    assert_eq!(v["labelled_one_face_maps"], 18);
    let v = json(&surfmaps(&["enumerate", "--edges", "1", "--genus", "0", "--two-face", "--labelled"]));
    assert_eq!(v["labelled_two_face_maps"]["zero"], 1);
    let o = surfmaps(&["enumerate", "--edges", "10", "--genus", "0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn dirichlet_moment() {
    let v = json(&surfmaps(&["moments", "dirichlet", "--exponents", "1,1,1"]));
    assert_eq!(v["value"], "1/60");
    let v = json(&surfmaps(&["moments", "dirichlet", "--exponents", "2,0"]));
    assert_eq!(v["value"], "1/3");
    assert_eq!(code(&surfmaps(&["moments", "dirichlet", "--k", "3", "--exponents", "1,1"])), 2);
}

fn voronoi(dir: &std::path::Path, threads: &str, extra: &[&str]) -> (Output, Value, String) {
    let out = dir.join(format!("run{threads}.json"));
    let csv = dir.join(format!("run{threads}.csv"));
    let mut args = vec![
        "sample", "voronoi", "--genus", "0", "--faces", "300", "--trials", "12", "--points", "3", "--threads",
        threads, "--out", out.to_str().unwrap(), "--csv-per-trial", csv.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = surfmaps(&args);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (o, file, std::fs::read_to_string(&csv).unwrap())
}

fn strip_runtime(mut v: Value) -> Value {
    let o = v.as_object_mut().unwrap();
    o.remove("runtime_seconds");
    o.remove("threads");
    v
}

#[test]
fn voronoi_schema_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let (o, file, csv) = voronoi(dir.path(), "2", &["--seed", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o), file);
    for key in ["schema_version", "params", "seed", "trials", "moments", "tie_rate", "runtime_seconds"] {
        assert!(file.get(key).is_some(), "missing {key}");
    }
    assert_eq!(file["seed"], 5);
    let m = &file["moments"][0];
    assert_eq!(m["name"], "E[Y1*Y2*Y3]");
    assert_eq!(m["reference"], "1/60");
    assert!(m["estimate"].is_f64() && m["stderr"].is_f64());
    assert!(file["tie_rate"]["by_trial_quantiles"]["median"].is_number());
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.starts_with("trial,mass_1,mass_2,mass_3,tie_mass,vertices"));
}

#[test]
fn voronoi_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (_, one, csv1) = voronoi(dir.path(), "1", &["--seed", "77"]);
    let (_, three, csv3) = voronoi(dir.path(), "3", &["--seed", "77"]);
    assert_eq!(strip_runtime(one), strip_runtime(three));
    assert_eq!(csv1, csv3);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\nfaces = 50\ntrials = 3\n").unwrap();
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_surfmaps"));
        c.args(["sample", "voronoi", "--threads", "1"]).args(args);
        match env {
            Some(s) => c.env("SURFMAPS_SEED", s),
            None => c.env_remove("SURFMAPS_SEED"),
        };
        let o = c.output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        json(&o)["seed"].as_u64().unwrap()
    };
    let cfg_arg = cfg.to_str().unwrap();
    assert_eq!(run(Some("7"), &["--faces", "50", "--trials", "3"]), 7);
    assert_eq!(run(Some("7"), &["--config", cfg_arg]), 11);
    assert_eq!(run(Some("7"), &["--config", cfg_arg, "--seed", "3"]), 3);
    assert_eq!(run(None, &["--faces", "50", "--trials", "3"]), 20261016);
}

#[test]
fn config_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "max-g = 3\nformat = \"json\"\n").unwrap();
    let o = surfmaps(&["--config", cfg.to_str().unwrap(), "tau"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["tau"].as_array().unwrap().len(), 4);
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(code(&surfmaps(&["--config", cfg.to_str().unwrap(), "tau", "--max-g", "1"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&surfmaps(&["frobnicate"])), 2);
    assert_eq!(code(&surfmaps(&["tau"])), 2);
    assert_eq!(code(&surfmaps(&["sample", "voronoi", "--trials", "3"])), 2);
    assert_eq!(code(&surfmaps(&["sample", "voronoi", "--faces", "5", "--trials", "3", "--points", "9"])), 2);
    assert_eq!(code(&surfmaps(&["sample", "voronoi", "--genus", "1", "--faces", "20", "--trials", "3"])), 2);
    assert_eq!(code(&surfmaps(&["--help"])), 0);
}

#[test]
fn selftest_lines_match_exit_code() {
    let o = surfmaps(&["selftest"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
    let all_pass = lines.iter().all(|l| l.starts_with("PASS"));
    assert_eq!(code(&o), if all_pass { 0 } else { 1 });
}
