use std::fs;
use std::process::{Command, Output};

use betadyn::{HitRecord, McReport, PartitionReport, SeriesReport};

fn betadyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betadyn"))
        .args(args)
        .env_remove("BETADYN_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let o = betadyn(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    betadyn(args).status.code().unwrap()
}

#[test]
fn examples() {
    assert_eq!(stdout(&["expand", "--beta", "2", "--x", "5/8", "--depth", "4"]).trim(), "1,0,1,0");
    assert_eq!(stdout(&["count", "--beta", "golden", "--n", "5"]).trim(), "13");
    let s = stdout(&["series", "--theorem", "1", "--beta", "2", "--f", "power:0.5", "--psi", "exp:1", "--N", "100"]);
    assert!(s.contains("verdict: divergent"));
    assert!(s.contains("measure: full"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["count", "--beta", "golden"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["count", "--beta", "0.5", "--n", "3"]), 1);
    assert_eq!(code(&["expand", "--beta", "2", "--x", "1/2", "--depth", "3", "--precision", "32"]), 1);
    assert_eq!(code(&["enumerate", "--beta", "2", "--n", "30", "--cap", "10"]), 3);
    assert_eq!(code(&["expand", "--beta", "real:1.5@70", "--x", "1/3", "--depth", "200", "--precision", "64"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn json_reports_parse_back() {
    let s = stdout(&["series", "--theorem", "2", "--beta", "golden", "--g", "power:3/2", "--psi", "exp:1,log:3", "--N", "50", "--format", "json"]);
    let r: SeriesReport = serde_json::from_str(&s).unwrap();
    assert_eq!(r.theorem, 2);
    let s = stdout(&["hits", "--beta", "2", "--x", "1/3", "--y", "2/3", "--psi", "C:1/100", "--N", "10", "--mode", "one-sided", "--format", "json"]);
    let r: HitRecord = serde_json::from_str(&s).unwrap();
    assert_eq!(r.hits, vec![1, 3, 5, 7, 9]);
    let s = stdout(&["partition-check", "--beta", "golden", "--n", "10", "--format", "json"]);
    let r: PartitionReport = serde_json::from_str(&s).unwrap();
    assert_eq!(r.cylinders, 144);
    let s = stdout(&["simulate", "--beta", "2", "--y", "1/3", "--psi", "poly:1,C:1/4", "--N", "100", "--samples", "50", "--seed", "3", "--format", "json"]);
    let r: McReport = serde_json::from_str(&s).unwrap();
    assert_eq!(r.params.samples, 50);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let args = [
            "simulate", "--beta", "golden", "--y", "1/2", "--psi", "poly:1,C:1/2", "--N", "60",
            "--samples", "40", "--seed", "9", "--format", "csv", "--out", p.to_str().unwrap(),
        ];
        assert!(stdout(&args).is_empty());
        fs::read(p).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert!(String::from_utf8(a).unwrap().starts_with("sample,x_hex,hits"));
    assert_eq!(code(&["simulate", "--beta", "2", "--y", "0", "--psi", "C:1/4", "--N", "5"]), 1);
}

#[test]
fn config_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# golden count\nbeta = golden\nn = 6\nbounds = true\n").unwrap();
    let s = stdout(&["count", "--config", cfg.to_str().unwrap()]);
    assert!(s.starts_with("21\nbounds: hold"));
    assert!(stdout(&["count", "--config", cfg.to_str().unwrap(), "--n", "7"]).starts_with("34"));
    let o = Command::new(env!("CARGO_BIN_EXE_betadyn"))
        .args(["star", "--beta", "pi", "--m", "5"])
        .env("BETADYN_PRECISION", "16")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_outputs() {
    let s = stdout(&["cylinders", "--beta", "2", "--n", "2", "--digits", "4"]);
    assert!(s.starts_with("word,left,length,exact\n"));
    assert!(s.contains("\"1,0\",0.5000,0.2500,true"));
    let s = stdout(&["dimension", "--beta", "2", "--tau", "1", "--levels", "4..8", "--format", "csv"]);
    assert!(s.lines().last().unwrap().starts_with("slope,0.5"));
    let s = stdout(&["grid", "--beta", "2", "--n", "2", "--psi", "C:1/2", "--digits", "3"]);
    assert_eq!(s.lines().count(), 10);
    assert_eq!(code(&["count", "--beta", "2", "--n", "3", "--format", "csv"]), 1);
}

#[test]
fn cover_and_kgb() {
    let s = stdout(&["cover", "--beta", "2", "--n", "3", "--psi", "C:1/2", "--x", "3/32", "--y", "3/4"]);
    assert_eq!(s, "136\ncontains: true\n");
    let s = stdout(&["cover", "--beta", "2", "--n", "3", "--psi", "C:1/2", "--centre", "unscaled", "--x", "3/32", "--y", "3/4"]);
    assert!(s.ends_with("contains: false\n"));
    let s = stdout(&["kgb", "--f", "power:1", "--G", "5", "--b", "0.2,0.7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!(v["mass"].as_f64().unwrap() >= 0.025);
    assert_eq!(code(&["kgb", "--f", "power:1", "--G", "5", "--b", "0.2"]), 1);
}

#[test]
fn admissibility_and_star() {
    assert_eq!(stdout(&["admissible", "--beta", "golden", "--word", "1,1"]).trim(), "false");
    assert_eq!(stdout(&["admissible", "--beta", "golden", "--word", "1,0,1"]).trim(), "true");
    assert_eq!(stdout(&["star", "--beta", "golden"]).trim(), "(1,0)^inf");
    assert_eq!(stdout(&["enumerate", "--beta", "golden", "--n", "3"]).lines().count(), 5);
}
