use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gauge-higgs");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn oracle_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("0 failed"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn single_point_scan_and_rerun_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model = ItPtLs\nL = 4\naxis = c2\nc1 = 0.2\nc3 = 0.1\nlo = 0.8\nhi = 0.8\ndc = 0.05\n\
         therm_sweeps = 50\nmeas_sweeps = 100\nbins = 5\nseed = 9\n",
    );
    let out = run(&["scan", "--config", &cfg, "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("a/scan.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "c,branch,u_per_site,u_err,c_per_site,c_err,acceptance");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][1].as_str(), rows[1][1].as_str()), ("up", "down"));
    for r in &rows {
        assert_eq!(r[0], "0.8");
        assert!(r[2..].iter().all(|v| v.parse::<f64>().unwrap().is_finite()), "{r:?}");
    }
    assert!(dir.path().join("a/transition.csv").exists());

    // The manifest alone reproduces the run.
    let out = run(&["scan", "--config", "a/manifest.cfg", "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = std::fs::read_to_string(dir.path().join("b/scan.csv")).unwrap();
    assert_eq!(data_rows(&again), rows);
}

#[test]
fn seed_and_worker_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model = IP\nL = 4\naxis = c1\nc2 = 1.0\nlo = 0.2\nhi = 0.4\ndc = 0.1\n\
         therm_sweeps = 20\nmeas_sweeps = 40\nbins = 4\nwarm_start = false\n",
    );
    let rows = |args: &[&str], out: &str| {
        let mut a = vec!["scan", "--config", cfg.as_str(), "--out", out];
        a.extend_from_slice(args);
        let o = run(&a, dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        data_rows(&std::fs::read_to_string(dir.path().join(out).join("scan.csv")).unwrap())
    };
    let one = rows(&["--seed", "4", "--workers", "1"], "w1");
    let three = rows(&["--seed", "4", "--workers", "3"], "w3");
    let other = rows(&["--seed", "5", "--workers", "1"], "s5");
    assert_eq!(one.len(), 6);
    assert_eq!(one, three);
    assert_ne!(one, other);
}

#[test]
fn pure_gauge_point_near_transition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model = PL\nL = 8\naxis = c2\nc2 = 1.02\ntherm_sweeps = 200\nmeas_sweeps = 400\nbins = 10\n",
    );
    let out = run(&["point", "--config", &cfg, "--out", "p"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&std::fs::read_to_string(dir.path().join("p/point.csv")).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0][0].as_str(), rows[0][1].as_str()), ("1.02", "point"));
    let v: Vec<f64> = rows[0][2..].iter().map(|s| s.parse().unwrap()).collect();
    assert!(v.iter().all(|x| x.is_finite()), "{v:?}");
    assert!(v[1] > 0.0 && v[3] > 0.0, "{v:?}");
    let snap = std::fs::read_to_string(dir.path().join("p/final.snapshot")).unwrap();
    assert!(snap.starts_with("gauge-higgs-snapshot"));
}

#[test]
fn profile_writes_slice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kernel = confinement\ngrid = 8\n");
    let out = run(&["profile", "--config", &cfg, "--out", "f"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("f/profile_confinement.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = IP\nL = 4\nfrobnicate = 3\n");
    let out = run(&["scan", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains('3'), "{err}");
}

#[test]
fn missing_scan_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = IP\nL = 4\naxis = c1\n");
    let out = run(&["scan", "--config", &cfg], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lo"), "{err}");
}
