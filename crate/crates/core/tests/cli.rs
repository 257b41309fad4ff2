use std::process::Command;
use torus_spectrum::sweep::{parse_csv, CSV_HEADER};
use torus_spectrum::Solver;

fn sweep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torus-sweep"))
}

#[test]
fn circular_free_torus_to_stdout() {
    let out = sweep()
        .args(["--alpha", "0.5", "--beta", "0.5", "--gamma-max", "1.0", "--gamma-steps", "3"])
        .args(["--curvature", "off", "--nu-max", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let table = parse_csv(&text).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.gamma).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    assert!(table.rows[0].epsilon0.abs() < 1e-8);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("ribbon.csv");
    std::fs::write(&cfg, "# ribbon check\nalpha = 0.3\nbeta = 0.5\ngamma_max = 0\ngamma-steps = 1\nsolver = ribbon\n")
        .unwrap();
    let status = sweep().arg("--config").arg(&cfg).args(["--alpha", "0.1"]).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let table = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!((row.solver, row.alpha, row.beta), (Solver::Ribbon, 0.1, 0.5));
    assert!((row.epsilon0 - 0.098696).abs() < 1e-6);
}

#[test]
fn plotdata_blocks_per_curve() {
    let out = sweep()
        .args(["--alpha", "0.5", "--beta", "0.1", "--gamma-max", "0.2", "--gamma-steps", "2"])
        .args(["--solver", "torus,ring", "--format", "plotdata", "--nu-max", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        let data: Vec<&str> = b.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].split_whitespace().count(), 3);
    }
}

#[test]
fn bad_input_fails_with_message() {
    let out = sweep().args(["--alpha", "-0.5"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    let out = sweep().args(["--variant", "sideways"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sideways"));

    let out = sweep().args(["--config", "/nonexistent/run.cfg"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.cfg"));
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = sweep()
        .args(["--alpha", "0.1", "--beta", "0.5", "--gamma-steps", "1", "--solver", "ribbon"])
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}
