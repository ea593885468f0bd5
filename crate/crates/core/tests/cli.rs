use std::path::Path;
use std::process::{Command, Output};

fn freefield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freefield")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn verify_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["verify", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    freefield(&args)
}

#[test]
fn same_seed_gives_identical_report_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--suite", "geometry", "--suite", "koopman", "--suite", "oscillator", "--trials", "3", "--seed", "17"];
    // the out directory is echoed in the config, so both runs use the same relative path
    for dir in [a.path(), b.path()] {
        let o = Command::new(env!("CARGO_BIN_EXE_freefield"))
            .current_dir(dir)
            .args(["verify", "--out", "run"])
            .args(args)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ra = std::fs::read(a.path().join("run/report.json")).unwrap();
    let rb = std::fs::read(b.path().join("run/report.json")).unwrap();
    assert_eq!(ra, rb);
    let doc: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["config"]["seed"], 17);
    assert_eq!(doc["suites"].as_array().unwrap().len(), 3);
    let check = &doc["suites"][1]["checks"][0];
    for key in ["name", "anchor", "maxResidual", "tolerance", "pass"] {
        assert!(!check[key].is_null(), "{key}");
    }
}

#[test]
fn tightened_tolerance_fails_the_quadrature_limited_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify_into(dir.path(), &["--suite", "shell", "--trials", "2", "--rel-tol", "1e-15", "--quiet"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("FAIL")));
    assert!(out.contains("quadrature-convergence"), "{out}");
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], false);
    // exact checks are not affected by the cap
    let checks = doc["suites"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"].as_str().unwrap().ends_with("hermiticity") && c["pass"] == true));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&freefield(&["verify", "--suite", "bogus", "--out", out])), 2);
    assert_eq!(code(&freefield(&["verify", "--suite", "geometry", "--trials", "0", "--out", out])), 2);
    assert_eq!(code(&freefield(&["verify", "--suite", "geometry", "--mass", "-1", "--out", out])), 2);
    assert_eq!(code(&freefield(&["verify", "--suite", "geometry", "--rel-tol", "0", "--out", out])), 2);
    assert_eq!(code(&freefield(&["verify", "--no-such-flag"])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "colour": "red"}"#).unwrap();
    assert_eq!(code(&freefield(&["verify", "--config", bad.to_str().unwrap(), "--out", out])), 2);
    std::fs::write(&bad, r#"{"hbar": 0.5}"#).unwrap();
    assert_eq!(code(&freefield(&["verify", "--config", bad.to_str().unwrap(), "--out", out])), 2);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"suites": ["koopman"], "seed": 5, "trials": {"koopman": 2}}"#).unwrap();
    let run = dir.path().join("run");
    let o = freefield(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "6", "--out", run.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 6);
    assert_eq!(doc["config"]["trials"]["koopman"], 2);
    assert_eq!(doc["suites"][0]["trials"], 2);
}

#[test]
fn density_export() {
    let o = freefield(&["export", "density", "--s", "2", "--s-plus", "0"]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    assert!(csv.starts_with("v,rho,rho_gaussian_reference\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 401);
    assert!(r.iter().all(|x| (x[1] - x[2]).abs() <= 1e-15 * x[2].max(1e-300)));
    let random = rows(&stdout(&freefield(&["export", "density", "--seed", "3"])));
    assert!(random.iter().all(|x| x[1] >= 0.0));
    assert_eq!(code(&freefield(&["export", "density", "--s", "1", "--s-plus", "3"])), 2);
    assert_eq!(code(&freefield(&["export", "density", "--s", "1"])), 2);
}

#[test]
fn scan_exports() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("scan.csv");
    let o = freefield(&["export", "scan", "--kind", "singularity", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&file).unwrap();
    assert!(csv.starts_with("width,absIS_plus,absIS_pm\n"));
    let r = rows(&csv);
    assert!(r.len() >= 4);
    assert!(r.windows(2).all(|w| w[1][0] < w[0][0]));

    let decay = rows(&stdout(&freefield(&["export", "scan", "--kind", "em-decay"])));
    let beyond: Vec<_> = decay.iter().filter(|x| x[0] >= 2.0).collect();
    assert!(beyond.len() >= 3);
    assert!(beyond.windows(2).all(|w| w[1][1] < w[0][1]));
    let spinor = rows(&stdout(&freefield(&["export", "scan", "--kind", "dirac-decay"])));
    assert!(spinor.windows(2).all(|w| w[1][1] < w[0][1]));
    assert_eq!(code(&freefield(&["export", "scan", "--kind", "sideways"])), 2);
}

#[test]
fn generating_export_matches_between_columns() {
    let o = freefield(&["export", "generating", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 21);
    for x in &r {
        let scale = x[1].hypot(x[2]).max(1.0);
        assert!((x[1] - x[3]).hypot(x[2] - x[4]) <= 1e-9 * scale, "{x:?}");
    }
}
