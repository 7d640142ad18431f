use std::fs;
use std::path::Path;

use crem::cli::{rerun, run, RunManifest, EXIT_ERROR, EXIT_GATE_FAILED, EXIT_OK, MANIFEST_FILE};

fn go(dir: &Path, args: &[&str]) -> i32 {
    let mut v = vec!["crem".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    v.push("--out".into());
    v.push(dir.to_string_lossy().into_owned());
    run(v)
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn phase_single_point_row() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["phase", "--window", "0:0:1:1"]), EXIT_OK);
    let text = fs::read_to_string(d.path().join("phase.csv")).unwrap();
    assert_eq!(text, "sigma,tau,region,p\n0,1,Boundary13,0.5\n");
    let m = manifest(d.path());
    assert_eq!(m.command, "phase");
    assert_eq!(m.outputs.len(), 1);
    assert_eq!(m.outputs[0].sha256, crem::cli::sha256_file(&d.path().join("phase.csv")).unwrap());
}

#[test]
fn zeros_files_and_rerun() {
    let d = tempfile::tempdir().unwrap();
    let args = ["zeros", "--n", "8", "--rho", "1", "--window", "0.1:0.5:1.2:1.6", "--replicas", "3", "--seed", "4"];
    assert_eq!(go(d.path(), &args), EXIT_OK);
    let m = manifest(d.path());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("summary.json")).unwrap()).unwrap();
    for r in 0..3 {
        let text = fs::read_to_string(d.path().join(format!("zeros_{r:05}.csv"))).unwrap();
        let rows = text.lines().count() - 1;
        assert_eq!(rows as u64, summary["counts"][r].as_u64().unwrap());
    }
    let e = tempfile::tempdir().unwrap();
    let again = rerun(&d.path().join(MANIFEST_FILE), e.path()).unwrap();
    assert_eq!(again.outputs, m.outputs);
}

#[test]
fn fluct_report_and_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let code = go(d.path(), &["fluct", "--n", "8", "--rho", "0.5", "--beta", "0.4+1.2i", "--replicas", "200"]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["case_tag"], "C1b");
    let passed = report["passed"].as_bool().unwrap();
    assert_eq!(code, if passed { EXIT_OK } else { EXIT_GATE_FAILED });
    assert_eq!(fs::read_to_string(d.path().join("samples.csv")).unwrap().lines().count(), 201);

    // two energies are far from Gaussian: the gate must fail
    let f = tempfile::tempdir().unwrap();
    assert_eq!(go(f.path(), &["fluct", "--N", "2", "--beta", "0.4,1.2", "--replicas", "2000"]), EXIT_GATE_FAILED);

    let g = tempfile::tempdir().unwrap();
    assert_eq!(go(g.path(), &["fluct", "--beta", "nonsense"]), EXIT_ERROR);
    assert_eq!(go(g.path(), &["fluct", "--n", "30", "--beta", "0.4,1.2"]), EXIT_ERROR);
}

#[test]
fn zeta_and_gaf_commands() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["zeta", "--beta", "1.0000001", "--replicas", "5"]), EXIT_ERROR);
    assert_eq!(go(d.path(), &["zeta", "--beta", "0.9+0.3i", "--replicas", "20", "--horizon", "200"]), EXIT_OK);
    assert_eq!(fs::read_to_string(d.path().join("zeta.csv")).unwrap().lines().count(), 21);
    let e = tempfile::tempdir().unwrap();
    let m = manifest(d.path());
    assert_eq!(rerun(&d.path().join(MANIFEST_FILE), e.path()).unwrap().outputs, m.outputs);

    let g = tempfile::tempdir().unwrap();
    assert_eq!(go(g.path(), &["gaf", "--radius", "1.5", "--replicas", "20"]), EXIT_OK);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(g.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["expected_count"], 2.25);
}
