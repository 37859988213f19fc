use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL_CONFIG: &str = "\
# small run
p = 8
n_nonzero = 3
n_grid = 10:30:10
reps = 2
test_size = 50
k_folds = 5
pool_size = 200
";

fn lassopeak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lassopeak")).args(args).output().unwrap()
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn data_csv(dir: &TempDir) -> PathBuf {
    let mut text = String::from("a,b,y,c\n");
    for i in 0..40 {
        let t = i as f64;
        let (a, b, c) = ((t * 0.37).sin(), (t * 1.3).cos(), (t * 0.11).sin() * t / 40.0);
        text.push_str(&format!("{a},{b},{},{c}\n", 2.0 * a - b + 0.1 * (t * 2.9).sin()));
    }
    write(dir, "data.csv", &text)
}

#[test]
fn simulate_writes_deterministic_records_and_summary() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "run.cfg", SMALL_CONFIG);
    let (out1, out2, summary) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("s.csv"));

    let first = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&out1), "--summary", arg(&summary)]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&out2)]);
    assert!(second.status.success());

    let records = fs::read_to_string(&out1).unwrap();
    assert_eq!(records, fs::read_to_string(&out2).unwrap());
    let lines: Vec<_> = records.lines().collect();
    assert_eq!(lines[0], "n,rep,selector,s_cv,s_applied,test_mse,full_ols_l1,mean_fold_ols_l1,pinv_ols_l1");
    assert_eq!(lines.len(), 1 + 3 * 2 * 2);
    assert!(!records.contains('\r'));

    let summary = fs::read_to_string(&summary).unwrap();
    let rows: Vec<_> = summary.lines().collect();
    assert_eq!(
        rows[0],
        "n,selector,mean_test_mse,sd_test_mse,mean_s_applied,sd_s_applied,mean_pinv_ols_l1,mean_full_ols_l1"
    );
    assert_eq!(rows.len(), 1 + 3 * 2);
}

#[test]
fn simulate_seed_and_selector_flags() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "run.cfg", SMALL_CONFIG);
    let (base, reseeded, standard) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    assert!(lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&base)]).status.success());
    assert!(lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&reseeded), "--seed", "7"]).status.success());
    assert_ne!(fs::read(&base).unwrap(), fs::read(&reseeded).unwrap());

    let run = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&standard), "--selector", "standard"]);
    assert!(run.status.success());
    let text = fs::read_to_string(&standard).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("standard")));
}

#[test]
fn simulate_pinv_denominator_mode() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "run.cfg", SMALL_CONFIG);
    let out = dir.path().join("a.csv");
    let run = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&out), "--denominator-mode", "pinv_ols"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 13);
}

#[test]
fn invalid_config_reports_error_class() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "bad.cfg", "snr = -1\n");
    let run = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&dir.path().join("x.csv"))]);
    assert!(!run.status.success());
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.starts_with("error: ValidationError:"), "{stderr}");

    let config = write(&dir, "typo.cfg", "p = 10\nreps == 3\n");
    let run = lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&dir.path().join("x.csv"))]);
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: ParseError:"));
}

#[test]
fn path_writes_knots_and_verifies() {
    let dir = TempDir::new().unwrap();
    let data = data_csv(&dir);
    let out = dir.path().join("knots.csv");
    let run = lassopeak(&["path", "--data", arg(&data), "--out", arg(&out), "--verify"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("max_kkt_residual="));
    let knots = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = knots.lines().collect();
    assert_eq!(lines[0], "knot,lambda,l1,n_active,a,b,c");
    assert!(lines.len() >= 4);
    assert!(lines[1].ends_with(",0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"));
}

#[test]
fn cv_writes_curve_and_selections() {
    let dir = TempDir::new().unwrap();
    let data = data_csv(&dir);
    let out = dir.path().join("curve.csv");
    let run = lassopeak(&["cv", "--data", arg(&data), "--k", "5", "--out", arg(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let curve = fs::read_to_string(&out).unwrap();
    assert_eq!(curve.lines().next(), Some("s,mean_error"));
    assert_eq!(curve.lines().count(), 102);
    let stdout = String::from_utf8_lossy(&run.stdout);
    for key in ["s_cv=", "s_tilde=", "mean_fold_ols_l1=", "full_ols_l1="] {
        assert!(stdout.contains(key), "{stdout}");
    }

    let again = dir.path().join("curve2.csv");
    assert!(lassopeak(&["cv", "--data", arg(&data), "--k", "5", "--out", arg(&again)]).status.success());
    assert_eq!(curve, fs::read_to_string(&again).unwrap());
}

#[test]
fn cv_rejects_bad_fold_count() {
    let dir = TempDir::new().unwrap();
    let data = data_csv(&dir);
    let run = lassopeak(&["cv", "--data", arg(&data), "--k", "1", "--out", arg(&dir.path().join("c.csv"))]);
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: InvalidFoldCount:"));
}

#[test]
fn summary_round_trips_simulate_output() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "run.cfg", SMALL_CONFIG);
    let (records, direct, rebuilt) = (dir.path().join("r.csv"), dir.path().join("s1.csv"), dir.path().join("s2.csv"));
    assert!(lassopeak(&["simulate", "--config", arg(&config), "--out", arg(&records), "--summary", arg(&direct)])
        .status
        .success());
    let run = lassopeak(&["summary", "--records", arg(&records), "--out", arg(&rebuilt)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(fs::read_to_string(&direct).unwrap(), fs::read_to_string(&rebuilt).unwrap());
}

#[test]
fn summary_of_header_only_records_fails() {
    let dir = TempDir::new().unwrap();
    let records = write(
        &dir,
        "empty.csv",
        "n,rep,selector,s_cv,s_applied,test_mse,full_ols_l1,mean_fold_ols_l1,pinv_ols_l1\n",
    );
    let run = lassopeak(&["summary", "--records", arg(&records), "--out", arg(&dir.path().join("s.csv"))]);
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: EmptyInput:"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let run = lassopeak(&["path", "--data", arg(&dir.path().join("nope.csv")), "--out", arg(&dir.path().join("k.csv"))]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("error: IoError:"));
}
