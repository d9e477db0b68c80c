use std::path::Path;
use std::process::{Command, Output};

fn tripwell(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripwell"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn linear_eigen_has_three_smooth_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = tripwell(&["eigen", "--g", "0", "--eps", "-0.8:0.8:41"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["epsilon", "branch_id", "mu", "a2", "b2", "c2", "classification", "fold_flag"]);
    assert_eq!(body.len(), 3 * 41);
    let flag = column(&header, "fold_flag");
    assert!(body.iter().all(|r| r[flag] == "0"));
}

#[test]
fn eigen_output_is_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["eigen", "--g", "-0.4", "--eps", "-0.8:0.8:21"];
    let a = tripwell(&[&args[..], &["--out", "a.csv"]].concat(), dir.path());
    let b = tripwell(&[&args[..], &["--out", "b.csv"]].concat(), dir.path());
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let csv_a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert!(!csv_a.contains(&b'\r'));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["g"], -0.4);
    assert_eq!(manifest["config"]["eps"], "-0.8:0.8:21");
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));

    let c = tripwell(&["eigen", "--config", "a.csv.manifest.json", "--out", "c.csv"], dir.path());
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(csv_a, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "# linear levels\ng = 0\neps = -0.5,0.5\n").unwrap();
    let out = tripwell(&["eigen", "--config", "run.conf"], dir.path());
    assert_eq!(rows(&String::from_utf8(out.stdout).unwrap()).1.len(), 6);
    let out = tripwell(&["eigen", "--config", "run.conf", "--eps", "0.1"], dir.path());
    assert_eq!(rows(&String::from_utf8(out.stdout).unwrap()).1.len(), 3);
    std::fs::write(dir.path().join("bad.conf"), "nonsense = 1\n").unwrap();
    assert_eq!(tripwell(&["eigen", "--config", "bad.conf"], dir.path()).status.code(), Some(1));
}

#[test]
fn continuation_marks_folds() {
    let dir = tempfile::tempdir().unwrap();
    let out = tripwell(&["eigen", "--mode", "continue", "--g", "-0.4", "--eps", "-0.8:0.8:81"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    let (flag, id, eps) = (column(&header, "fold_flag"), column(&header, "branch_id"), column(&header, "epsilon"));
    let folds: Vec<f64> = body
        .iter()
        .filter(|r| r[flag] == "1" && r[id] == "0")
        .map(|r| r[eps].parse().unwrap())
        .collect();
    assert_eq!(folds.len(), 2, "{folds:?}");
    assert!(folds.iter().any(|f| (f + 0.25).abs() < 0.05));
}

#[test]
fn linear_lz_sweep_matches_the_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = tripwell(&["lz", "sweep", "--g", "0", "--alpha", "0.02,0.05", "--w", "0.2,0.4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["alpha", "P", "P_lz_formula", "g", "w"]);
    assert_eq!(body.len(), 4);
    for r in &body {
        let (p, f): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((p - f).abs() / f < 0.01, "{r:?}");
    }
}

#[test]
fn lz_run_writes_the_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = tripwell(&["lz", "run", "--g", "-0.4", "--alpha", "0.02", "--samples", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "epsilon", "a2", "b2", "c2", "norm_dev", "branch_overlap"]);
    assert_eq!(body.len(), 50);
    let first: f64 = body[0][6].parse().unwrap();
    assert!(first > 0.999999);
    assert!(String::from_utf8(out.stderr).unwrap().contains("P = "));
}

#[test]
fn stirap_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = tripwell(&["stirap", "sweep", "--delta-detuning", "0.1", "--g", "-0.3:0.3:13"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["g", "efficiency", "feasible", "horn_scenario"]);
    assert_eq!(body.len(), 13);
    let e = |g: f64| -> f64 {
        let r = body.iter().find(|r| (r[0].parse::<f64>().unwrap() - g).abs() < 1e-9).unwrap();
        r[1].parse().unwrap()
    };
    assert!(e(0.05) > 0.95 && e(0.2) < 0.9);

    let out = tripwell(&["stirap", "run", "--g", "0.05", "--samples", "20"], dir.path());
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "v", "w", "a2", "b2", "c2"]);
    let c2: f64 = body.last().unwrap()[5].parse().unwrap();
    assert!(c2 > 0.95);

    let out = tripwell(&["stirap", "levels", "--g", "0.2", "--times", "-800:800:9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["t", "level_id", "mu", "a2", "b2", "c2", "classification"]);
    assert!(body.len() >= 27);
    assert!(String::from_utf8(out.stderr).unwrap().contains("dark branch disappears"));
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = tripwell(&["stirap", "sweep", "--g", "0,0.2"], dir.path());
    let json = tripwell(&["stirap", "sweep", "--g", "0,0.2", "--format", "json"], dir.path());
    let (header, body) = rows(&String::from_utf8(csv.stdout).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(header));
    for (r, j) in body.iter().zip(doc["rows"].as_array().unwrap()) {
        assert_eq!(r[0].parse::<f64>().unwrap(), j[0].as_f64().unwrap());
        assert_eq!(r[1].parse::<f64>().unwrap(), j[1].as_f64().unwrap());
        assert_eq!(r[3], j[3].as_str().unwrap());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(tripwell(&["eigen", "--bogus", "1"], d).status.code(), Some(1));
    assert_eq!(tripwell(&["lz", "sweep", "--alpha", "0,0.1"], d).status.code(), Some(1));
    assert_eq!(tripwell(&["eigen", "--eps", "1:2"], d).status.code(), Some(1));
    assert_eq!(tripwell(&["lz", "run", "--span", "1"], d).status.code(), Some(1));
    assert_eq!(tripwell(&["stirap", "run", "--width", "-5"], d).status.code(), Some(1));
    assert_eq!(tripwell(&["--help"], d).status.code(), Some(0));

    // too loose a tolerance breaks the norm bound: failure, and nothing written
    let out = tripwell(&["lz", "run", "--g", "0", "--alpha", "0.05", "--tol", "0.01", "--out", "x.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("x.csv").exists() && !d.join("x.csv.manifest.json").exists());
}
