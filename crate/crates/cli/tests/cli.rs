use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-dimer")).args(args).env_remove("TORUS_DIMER_OUT_DIR").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn law_entries(v: &Value) -> Vec<(i64, i64, f64)> {
    v["law"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["r"].as_i64().unwrap(), e["s"].as_i64().unwrap(), e["p"].as_f64().unwrap()))
        .collect()
}

#[test]
fn verify_default_passes() {
    let o = run(&["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8(o.stdout).unwrap();
    for check in ["forman", "temperley", "binom", "periods", "fred", "theta", "torsion", "poisson"] {
        assert!(out.lines().any(|l| l.starts_with(check) && l.ends_with("pass")), "{check} missing");
    }
}

#[test]
fn flipped_height_form_fails_verification() {
    let o = run(&["verify", "--inject-omega-flip"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("periods"));
}

#[test]
fn verify_filters_checks() {
    let o = run(&["verify", "--only", "fred", "--n", "8"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("fred") && rows[0].contains("8x8"));
    assert_eq!(code(&run(&["verify", "--only", "nonsense"])), 64);
}

#[test]
fn law_json_is_normalised() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("law.json");
    let o = run(&["law", "--n", "16", "--shift", "0,16", "--M", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert_eq!(v["M"], 9);
    assert_eq!(v["tau"].as_array().unwrap().len(), 2);
    let total: f64 = law_entries(&v).iter().map(|e| e.2).sum();
    assert!((total - 1.0).abs() < 1e-10);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("tau_re,tau_im,M,total,tv_to_discrete_gaussian"));
}

#[test]
fn law_from_file_matches_golden_enumeration() {
    let o = run(&["law", "--graph", &data("two_by_two.tg"), "--M", "11"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got: Value = serde_json::from_slice(&o.stdout).unwrap();
    let golden: Value = serde_json::from_str(&fs::read_to_string(data("two_by_two_law.json")).unwrap()).unwrap();
    let got = law_entries(&got);
    for (r, s, p) in law_entries(&golden) {
        let q = got.iter().find(|e| e.0 == r && e.1 == s).map_or(0.0, |e| e.2);
        assert!((p - q).abs() < 1e-10, "({r},{s}): {q} vs {p}");
    }
    let golden_mass: f64 = law_entries(&golden).iter().map(|e| e.2).sum();
    assert!((golden_mass - 1.0).abs() < 1e-12);
}

#[test]
fn law_at_n64_uses_the_fast_path() {
    let o = run(&["law", "--n", "64", "--M", "9"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn coarse_grid_reports_aliasing() {
    let o = run(&["law", "--n", "4", "--M", "5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("aliasing"));
}

#[test]
fn converge_writes_the_sweep() {
    let o = run(&["converge", "--sizes", "8,16,32,64", "--tau", "i"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,tau_re,tau_im,M,tv,aliasing,seconds");
    assert_eq!(lines.len(), 5);
    let tv: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(tv[3] < tv[0]);

    let o = run(&["converge", "--sizes", "8", "--tau", "i"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn converge_rejects_bad_input() {
    assert_eq!(code(&run(&["converge", "--sizes", "8,16", "--tau", "1+"])), 64);
    assert_eq!(code(&run(&["converge", "--sizes", "8,16", "--tau", "2-1i"])), 64);
    assert_eq!(code(&run(&["converge", "--sizes", "16,8"])), 64);
    assert_eq!(code(&run(&["converge", "--sizes", "8,16", "--slack", "-1"])), 64);
}

#[test]
fn sample_agrees_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = run(&["sample", "--n", "2", "--samples", "100000", "--seed", "7", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&[
        "--threads",
        "1",
        "sample",
        "--n",
        "2",
        "--samples",
        "100000",
        "--seed",
        "7",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = read_json(&a);
    assert_eq!(v["samples"], 100000);
    assert!(v["law"][0]["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn sample_guards_and_deviation() {
    assert_eq!(code(&run(&["sample", "--n", "2", "--samples", "50", "--seed", "1"])), 64);
    assert_eq!(code(&run(&["sample", "--n", "2", "--samples", "500"])), 64);
    // 100 samples is few enough that this seed strays past 3 sigma + 0.005
    assert_eq!(code(&run(&["sample", "--n", "2", "--samples", "100", "--seed", "2"])), 4);
}

#[test]
fn generated_graph_round_trips_through_law() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.tg");
    let o = run(&["generate", "--n", "3", "--shift", "1,2", "--random-seed", "5", "--out", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&g).unwrap().starts_with("torus "));
    assert_eq!(code(&run(&["law", "--graph", g.to_str().unwrap(), "--M", "9"])), 0);
}

#[test]
fn out_dir_override_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# coarse grid\nn = 4\nM = 5\nout = law.json\n").unwrap();
    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_torus-dimer"))
            .args(args)
            .env("TORUS_DIMER_OUT_DIR", dir.path())
            .output()
            .unwrap()
    };
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&with_env(&["--config", cfg, "law"])), 2);
    let o = with_env(&["--config", cfg, "law", "--M", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("law.json"));
    assert_eq!(v["M"], 9);
    assert_eq!(code(&run(&["--config", "/nonexistent/cfg", "law"])), 64);
}

#[test]
fn grid_csvs() {
    let o = run(&["det-csv", "--n", "4", "--grid", "3"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 10);
    assert!(out.lines().nth(1).unwrap().ends_with(",1"));
    let o = run(&["transfer-csv", "--n", "4", "--grid", "2"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("u,v,norm_inf,"));
}
