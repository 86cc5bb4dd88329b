//! End-to-end runs of the `collapse-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-lab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn short_config(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let text = collapse_lab::demos::DEMOS.iter().find(|d| d.0 == name).unwrap().1;
    let mut cfg: serde_json::Value = serde_json::from_str(text).unwrap();
    edit(&mut cfg);
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn region_queries() {
    let out = bin(&["region", "kappa", "--n", "6", "--m", "1", "--variant", "pe"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["sup_kappa"], "1/10");

    let out = bin(&["region", "gamma", "--n", "3", "--m", "1", "--kappa", "1/5"]);
    let v = json(&out);
    assert_eq!((v["window"]["lower"].as_str(), v["window"]["upper"].as_str()), (Some("2/5"), Some("2/3")));
    assert_eq!(v["theta"], "4/3");

    let out = bin(&["--seed", "3", "region", "feasibility", "--samples", "300"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["failures"], 0);

    let out = bin(&["region", "kappa", "--n", "3", "--m", "1", "--variant", "main"]);
    assert_eq!(out.status.code(), Some(1), "main needs --p");
    assert_eq!(bin(&["region", "nonsense"]).status.code(), Some(2));
}

#[test]
fn simulate_monitor_certify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "jl_subcritical", |c| {
        c["t_end"] = 0.1.into();
        c["grid"]["cells"] = 64.into();
    });
    let run = dir.path().join("run");
    let out = bin(&["simulate", "--config", &cfg, "--out", run.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["status"]["status"], "reached_t");
    for f in ["config.json", "series.csv", "result.json", "certificate.json", "snapshots/00000.csv"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let header = std::fs::read_to_string(run.join("series.csv")).unwrap();
    assert!(header.starts_with("t,dt,sup_u,mass,Mbar,phi,psi,I1,I2,I3,I4,clip_mass"));

    let ledger = dir.path().join("ledger.csv");
    let out = bin(&["--strict", "monitor", "--run", run.to_str().unwrap(), "--out", ledger.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["full_pass"], true);
    assert!(std::fs::read_to_string(&ledger).unwrap().starts_with("t,check_id,lhs,rhs,margin,pass,applicable"));

    let out = bin(&["certify", "--config", &cfg]);
    assert!(out.status.success());
    assert_eq!(json(&out)["feasible"], true);

    let report = dir.path().join("emp.json");
    let out = bin(&["certify", "--config", &cfg, "--empirical", run.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    // The fit may be infeasible on a decaying run; either way the command
    // reports cleanly.
    if out.status.success() {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(v["constants"]["source"]["kind"], "empirical");
    } else {
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn strict_flag_turns_ledger_failures_into_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // A negative ODI tolerance makes every ODI entry fail.
    let cfg = short_config(dir.path(), "jl_subcritical", |c| {
        c["t_end"] = 0.05.into();
        c["grid"]["cells"] = 32.into();
        c["monitor"] = serde_json::json!({ "tolerances": { "odi": -1.0, "odi_per_dr": 0.0 } });
    });
    let run = dir.path().join("run");
    assert!(bin(&["simulate", "--config", &cfg, "--out", run.to_str().unwrap()]).status.success());
    let ledger = dir.path().join("l.csv");
    let (r, l) = (run.to_str().unwrap(), ledger.to_str().unwrap());
    assert_eq!(bin(&["monitor", "--run", r, "--out", l]).status.code(), Some(0));
    assert_eq!(bin(&["--strict", "monitor", "--run", r, "--out", l]).status.code(), Some(3));
}

#[test]
fn sweep_runs_in_parallel_and_handles_edges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "homogeneous_logistic", |c| {
        c["t_end"] = 0.2.into();
    });
    let out_dir = dir.path().join("sweep");
    let out = bin(&["sweep", "--config", &cfg, "--axis", "kappa", "--values", "0.5,1,2", "--jobs", "2", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("value,status,t_star,max_sup_u"));
    assert!(lines[1..].iter().all(|l| l.contains("reached_t")));

    let empty = dir.path().join("empty");
    let out = bin(&["sweep", "--config", &cfg, "--axis", "kappa", "--values", "", "--out", empty.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(empty.join("summary.csv")).unwrap().lines().count(), 1);

    let out = bin(&["sweep", "--config", &cfg, "--axis", "zeta", "--values", "1", "--out", empty.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown sweep axis"));
}

#[test]
fn demo_names_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["demo", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("jl_n3_blowup"));
}
