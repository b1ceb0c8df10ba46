use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lrcforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrcforge"))
        .args(args)
        .env_remove("LRCFORGE_BUDGET")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_then_verify_family_a() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("a.json");
    let out = lrcforge(&["construct", "--family", "A", "--q", "7", "--u", "2", "--v", "1", "--t", "2", "--out", path_str(&code)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let first = lrcforge(&["verify", "--code", path_str(&code)]);
    assert_eq!(first.status.code(), Some(0));
    let report = json(&first);
    assert_eq!(report["verdict"], "verified");
    assert_eq!(report["computed"]["n"], 12);
    assert_eq!(report["computed"]["k"], 7);
    assert_eq!(report["computed"]["distance"]["d"], 4);
    assert_eq!(report["optimal_lrc"]["optimal"], true);

    let second = lrcforge(&["verify", "--code", path_str(&code)]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn construct_is_deterministic() {
    let args = ["construct", "--family", "C", "--q", "9", "--u", "2", "--v", "1", "--t", "2", "--m", "4"];
    let a = lrcforge(&args);
    let b = lrcforge(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["kind"], "code");
}

#[test]
fn unmet_hypothesis_exits_two() {
    let out = lrcforge(&["construct", "--family", "A", "--q", "7", "--u", "4", "--v", "2", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(lrcforge(&["construct", "--family", "D", "--q", "7"]).status.code(), Some(2));
    assert_eq!(lrcforge(&["verify", "--code", "/nonexistent/code.json"]).status.code(), Some(2));
}

#[test]
fn full_space_has_no_locality() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("full.json");
    let doc = r#"{"schema":"lrcforge/1","kind":"code","field":{"p":5,"e":1},"n":4,
        "generator":{"field":{"p":5,"e":1},"rows":4,"cols":4,"entries":[1,0,0,0,0,1,0,0,0,0,1,0,0,0,0,1]}}"#;
    std::fs::write(&code, doc).unwrap();
    let out = lrcforge(&["verify", "--code", path_str(&code), "--r", "1", "--delta", "2"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["verdict"], "failed");
    assert_eq!(report["computed"]["distance"]["d"], 1);
}

#[test]
fn tiny_budget_is_unverified() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("a.json");
    lrcforge(&["construct", "--family", "A", "--q", "11", "--u", "3", "--v", "2", "--t", "3", "--out", path_str(&code)]);

    let out = lrcforge(&["verify", "--code", path_str(&code), "--budget", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["verdict"], "unverified");
    assert!(report["computed"]["distance"]["lower"].as_u64() < report["computed"]["distance"]["upper"].as_u64());

    let env = Command::new(env!("CARGO_BIN_EXE_lrcforge"))
        .args(["verify", "--code", path_str(&code)])
        .env("LRCFORGE_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(1));
    assert_eq!(json(&env)["verdict"], "unverified");
}

#[test]
fn explicit_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("a.json");
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    lrcforge(&["construct", "--family", "A", "--q", "7", "--u", "2", "--v", "1", "--t", "2", "--out", path_str(&code)]);
    std::fs::write(&good, r#"{"schema":"lrcforge/1","kind":"profile","r":4,"delta":3,"groups":[[1,2,3,4,5,6],[7,8,9,10,11,12]]}"#).unwrap();
    std::fs::write(&bad, r#"{"schema":"lrcforge/1","kind":"profile","r":4,"delta":3,"groups":[[1,2,3,7,8,9],[4,5,6,10,11,12]]}"#).unwrap();

    let ok = lrcforge(&["verify", "--code", path_str(&code), "--profile", path_str(&good)]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["profile"]["groups"][1][0], 7);

    let fail = lrcforge(&["verify", "--code", path_str(&code), "--profile", path_str(&bad)]);
    assert_eq!(fail.status.code(), Some(1));
    let report = json(&fail);
    assert_eq!(report["verdict"], "failed");
    assert_eq!(report["locality"]["verified"], false);
}

#[test]
fn tau_od_matrices() {
    let one = lrcforge(&["matrix", "--tau-od", "--type", "I", "--N", "3", "--q", "9"]);
    assert_eq!(one.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&one.stderr).contains("(1 3)"));
    assert_eq!(json(&one)["kind"], "tau-od-matrix");

    let two = lrcforge(&["matrix", "--tau-od", "--type", "II", "--N", "3", "--q", "7"]);
    assert_eq!(two.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&two.stderr).contains("(2 3)"));

    // 4 divides q + 1 = 8, so no type II matrix exists.
    assert_eq!(lrcforge(&["matrix", "--tau-od", "--type", "II", "--N", "4", "--q", "7"]).status.code(), Some(2));
}

#[test]
fn reproduce_exit_codes() {
    let ok = lrcforge(&["reproduce", "--example", "vi-c"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ok"));

    let typo = lrcforge(&["reproduce", "--example", "v-a"]);
    assert_eq!(typo.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&typo.stdout).contains("paper-typo"));

    let broken = lrcforge(&["reproduce", "--example", "v-b"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&broken.stdout).contains("FAILED"));
}

#[test]
fn quantum_document_verifies_with_hermitian_duality() {
    let dir = tempfile::tempdir().unwrap();
    let mp = dir.path().join("mp.json");
    let out = lrcforge(&["quantum", "--theorem", "mp12", "--q", "7", "--N", "3", "--u", "2", "--v", "1", "--t", "2", "--out", path_str(&mp)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["computed"], "[[36,10,4]]_7, (4,3)");
    assert_eq!(report["tau"], "(2 3)");

    let verify = lrcforge(&["verify", "--code", path_str(&mp), "--r", "4", "--delta", "3", "--duality", "hermitian"]);
    assert_eq!(verify.status.code(), Some(0));
    let v = json(&verify);
    assert_eq!(v["quantum"]["params"], "[[36,10,4]]_7, (4,3)");
    assert_eq!(v["quantum"]["optimal"], true);
    assert_eq!(v["verdict"], "verified");
}
