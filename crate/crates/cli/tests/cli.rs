//! End-to-end runs of the binary: exit codes, report shape, determinism.

use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moyal-m3")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_algebra_passes() {
    let out = bin(&["verify-algebra"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["passed"], true);
    assert!(doc.get("wall_time_seconds").is_none());
    for c in doc["checks"].as_array().unwrap() {
        assert!(!c["anchor"].as_str().unwrap().is_empty());
        assert_eq!(c["verdict"], "pass");
    }
}

#[test]
fn star_eval_prints_first_order_term() {
    let out = bin(&["star-eval", "s1", "t2", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["product"], "s1*t2");
    assert_eq!(doc["terms"][0]["term"], "P1");
    assert_eq!(doc["terms"][0]["value"], "(-1)");
    assert_eq!(doc["value"], "(1/2*i) + s1*t2");
    assert_eq!(doc["exact"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify-rep", "--lambda", "0"][..],
        &["verify-rep", "--lambda", "-1"],
        &["verify-rep", "--bogus"],
        &["no-such-command"],
        &["verify-algebra", "--tol.nope=1"],
        &["verify-algebra", "--tol.fft=-1"],
        &["verify-rep", "--grid", "3"],
        &["star-eval", "s1 +", "t2"],
    ] {
        let out = bin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failed_check_exits_one() {
    // Under the unit bivector the characters are no longer eigenfunctions.
    let out = bin(&["verify-polarization", "--lambda", "1", "--chi", "1/2,1+i", "--bivector", "unit"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn tolerance_override_reaches_the_report() {
    let out = bin(&["verify-algebra", "--tol.pointwise", "1e-3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["config"]["tolerances"]["pointwise"], 1e-3);
}

#[test]
fn fixed_seed_reports_are_identical() {
    let dir = std::env::temp_dir().join(format!("moyal-m3-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let files: Vec<_> = (0..2).map(|k| dir.join(format!("rep{k}.json"))).collect();
    let csv = dir.join("rep.csv");
    for (k, f) in files.iter().enumerate() {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_moyal-m3"));
        cmd.args(["verify-rep", "--lambda", "1", "--seed", "5", "--out", f.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
        cmd.env("MOYAL_M3_THREADS", if k == 0 { "1" } else { "3" });
        assert_eq!(cmd.status().unwrap().code(), Some(0));
    }
    let (a, b) = (std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
    assert_eq!(a, b);
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("sigma1,sigma2,sigma3,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn orbit_subcommands() {
    let out = bin(&["orbit", "classify", "--mu", "1,0,0", "--alpha", "0,3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["orbit"]["kind"], "cotangent-bundle");
    assert_eq!(doc["orbit"]["radius"], 5.0);
    assert_eq!(json(&bin(&["orbit", "classify", "--mu", "0,2,0"]))["orbit"]["kind"], "sphere");
    assert_eq!(json(&bin(&["orbit", "classify"]))["orbit"]["kind"], "trivial-point");

    let doc = json(&bin(&["orbit", "chart", "--lambda", "2", "--point", "0,0,0.5,0"]));
    assert_eq!(doc["sphere_base"], serde_json::json!([2.0, 2.0, 0.0]));
    assert_eq!(doc["energies"].as_array().unwrap().len(), 6);
}
