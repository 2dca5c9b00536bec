use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rcim"));
    c.env_remove("RCIM_LIBRARY");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn recipe_listing() {
    let out = bin().args(["recipes", "--options", "ba,rf,rw"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert_eq!(text.lines().next(), Some("ba"));
    let all = bin().arg("recipes").output().unwrap();
    assert_eq!(String::from_utf8(all.stdout).unwrap().lines().count(), 64);
}

#[test]
fn explore_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let st = bin()
        .current_dir(dir.path())
        .arg("explore")
        .arg(fixture("adder2.v"))
        .args(["--library", "default.topo", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["circuit"], "adder2");
    assert_eq!(v["signoff"]["passed"], true);
    assert_eq!(v["stats"]["m_topologies"], 12);
}

#[test]
fn reports_do_not_depend_on_threads() {
    let run = |jobs: &str| {
        let out = bin()
            .args(["explore", "gen:adder-8", "--exhaustive", "--jobs", jobs])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
}

#[test]
fn exit_codes() {
    let usage = bin().arg("--no-such-flag").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));

    let missing = bin()
        .args(["--error-json", "characterize", "/nonexistent/x.aag"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(v["error"], "load");
    assert!(missing.stdout.is_empty());

    let tight = bin()
        .args(["explore", "gen:adder-4", "--max-latency-ns", "0.5"])
        .output()
        .unwrap();
    assert_eq!(tight.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&tight.stderr).contains("nearest"));
}

#[test]
fn library_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("one.topo");
    std::fs::write(
        &lib,
        "[[topology]]\nmacro_kb = 4\nmacro_count = 3\nrows = 128\ncols = 256\n",
    )
    .unwrap();
    let out = bin()
        .env("RCIM_LIBRARY", &lib)
        .args(["explore", "gen:adder-2", "--no-signoff"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stats"]["m_topologies"], 1);
    assert_eq!(v["candidates"][0]["topology"], "4KBx3");
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let aag = dir.path().join("opt.aag");
    let st = bin()
        .arg("synth")
        .arg(fixture("adder2_deep.aag"))
        .args(["--recipe", "ba"])
        .arg("--aiger")
        .arg(&aag)
        .output()
        .unwrap();
    assert!(st.status.success());
    let v: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert!(v["aig_levels"].as_u64().unwrap() <= 8);
    for cmd in [
        vec!["characterize", "--format", "csv"],
        vec!["map", "--topology", "8KBx6", "--format", "text"],
        vec!["simulate", "--topology", "4KBx3"],
        vec!["estimate", "--mode", "scheduled", "--pipelined"],
    ] {
        let out = bin().arg(cmd[0]).arg(&aag).args(&cmd[1..]).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn calibration_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("fit.cal");
    let out = bin().arg("calibrate").arg("--save").arg(&cal).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["residuals"].as_array().unwrap().len(), 18);
    assert_eq!(v["identity"].as_array().unwrap().len(), 18);
    let est = bin()
        .args(["estimate", "gen:adder-4", "--calibration"])
        .arg(&cal)
        .output()
        .unwrap();
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
}
