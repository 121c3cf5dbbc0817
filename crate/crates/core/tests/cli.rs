use serde_json::Value;
use std::process::{Command, Output};

fn demilin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_demilin"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn certify_dirac_is_exactly_k() {
    let out = demilin(&[
        "certify",
        "--functional",
        "dirac@0",
        "--gamma",
        "linear:1",
        "--samples",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["schema"], "demilin-report/1");
    assert_eq!(v["verdict"], "PASS");
    assert!(v["report"]["min_margin_k"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn counterexample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let out = demilin(&[
        "counterexample",
        "--C",
        "10",
        "--k",
        "1",
        "--seq",
        "0.5,0.25,0.125,0.0625",
        "--level",
        "3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let m0 = v["report"]["m0"].as_u64().unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,lhs,rhs"));
    let row = lines.find(|l| l.starts_with(&format!("{m0},"))).unwrap();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!(cols[1] > cols[2]);
}

#[test]
fn bad_config_exits_two_with_json_error() {
    for args in [
        vec!["certify", "--functional", "nope", "--gamma", "linear:1"],
        vec!["counterexample", "--seq", "0.5,0.75"],
        vec!["bounds", "--functional", "dirac@0", "--set", "2,1"],
        vec!["certify", "--bogus"],
    ] {
        let out = demilin(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"]["kind"].is_string(), "{args:?}");
        assert!(!err["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn runs_are_reproducible() {
    let args = [
        "certify",
        "--functional",
        "sin-point@0",
        "--gamma",
        "pi-half",
        "--samples",
        "300",
        "--seed",
        "9",
    ];
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    let a = strip(report(&demilin(&args)));
    let b = strip(report(&demilin(&args)));
    assert_eq!(a, b);
    assert_eq!(a["config"]["command"]["seed"], 9);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = demilin(&[
        "support",
        "--functional",
        "sin-integral",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["command"]["command"], "support");
}

#[test]
fn quick_subcommands_succeed() {
    for args in [
        vec!["support", "--functional", "dirac@0.5"],
        vec![
            "extend-check",
            "--functional",
            "sin-point@0.5",
            "--trials",
            "10",
            "--cutoff-pairs",
            "3",
        ],
        vec!["rep", "--functional", "sin-point@0", "--probes", "10"],
        vec![
            "bounds",
            "--functional",
            "dirac@0",
            "--set",
            "-1,1",
            "--k-max",
            "1",
            "--probes",
            "8",
        ],
        vec![
            "bounds",
            "--functional",
            "dirac@0",
            "--set",
            "-1,1",
            "--C",
            "1",
            "--order",
            "0",
            "--probes",
            "8",
        ],
    ] {
        let out = demilin(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(report(&out)["report"].is_object(), "{args:?}");
    }
}

#[test]
fn failing_verdict_exits_one() {
    let out = demilin(&[
        "certify",
        "--functional",
        "exp-point@0",
        "--class",
        "k",
        "--gamma",
        "linear:1",
        "--samples",
        "300",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(report(&out)["verdict"], "FAIL");
}
