use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use monk::datagen::sample_gaussian;
use monk::mmd::mmd_vstat;
use monk::{AggregatedGram, Kernel};
use tempfile::TempDir;

fn monk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monk"))
}

fn splice() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/splice.data")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines()
        .map(|l| {
            let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(l.as_bytes());
            r.records().next().unwrap().unwrap().iter().map(str::to_owned).collect()
        })
        .collect()
}

#[test]
fn exp1_writes_the_documented_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"experiment": "gauss_outliers", "kernel": "rbf:sigma=1",
            "estimators": ["ustat", "monk_bcd_fast"], "N_list": [30, 60], "Q_list": [3, 5],
            "reps": 2, "T": 20, "seed": 11}"#,
    );
    let out = dir.path().join("a.csv");
    let o = run(monk().args(["exp1", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0],
        ["experiment", "kernel", "estimator", "N", "Q", "rep", "seed", "mmd_hat", "mmd_true", "abs_error", "wall_ms", "error"]
    );
    assert_eq!(rows.len(), 1 + 2 * 2 * 2 * 2);
    assert_eq!(rows[1][..6], ["gauss_outliers", "rbf:sigma=1", "ustat", "30", "3", "0"]);
    assert_eq!(rows[16][..6], ["gauss_outliers", "rbf:sigma=1", "monk_bcd_fast", "60", "5", "1"]);

    // Identical reruns agree on everything but timing.
    let again = dir.path().join("b.csv");
    run(monk().args(["exp1", "--config"]).arg(&cfg).arg("--out").arg(&again));
    let strip = |rows: Vec<Vec<String>>| -> Vec<Vec<String>> {
        rows.into_iter()
            .map(|mut r| {
                r.remove(10);
                r
            })
            .collect()
    };
    assert_eq!(strip(csv_rows(&out)), strip(csv_rows(&again)));

    // The global seed overrides the configured one.
    let other = dir.path().join("c.csv");
    run(monk().args(["--seed", "12", "exp1", "--config"]).arg(&cfg).arg("--out").arg(&other));
    assert_ne!(strip(csv_rows(&out)), strip(csv_rows(&other)));
}

#[test]
fn exp1_pareto_truth_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"experiment": "pareto", "estimators": ["vstat"], "N_list": [40], "Q_list": [1], "reps": 1}"#,
    );
    let out = dir.path().join("p.csv");
    assert!(run(monk().args(["exp1", "--config"]).arg(&cfg).arg("--out").arg(&out)).status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][8].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let bad_key = write(&dir, "a.json", r#"{"experiment": "gauss_clean", "colour": 1}"#);
    let bad_q = write(
        &dir,
        "b.json",
        r#"{"experiment": "gauss_clean", "N_list": [10], "Q_list": [3], "reps": 1}"#,
    );
    for cfg in [&bad_key, &bad_q, &dir.path().join("missing.json")] {
        let o = run(monk().args(["exp1", "--config"]).arg(cfg).arg("--out").arg(&out));
        assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // Allowed once leftover points may be dropped.
    let o = run(monk().args(["--drop-remainder", "exp1", "--config"]).arg(&bad_q).arg("--out").arg(&out));
    assert!(o.status.success());
}

#[test]
fn estimate_prints_one_number() {
    let dir = TempDir::new().unwrap();
    let xs = sample_gaussian(0.0, 1.0, 12, 1).unwrap();
    let ys = sample_gaussian(0.5, 1.0, 12, 2).unwrap();
    let (xp, yp) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    xs.write_csv(&xp).unwrap();
    ys.write_csv(&yp).unwrap();
    let k = Kernel::rbf(1.0).unwrap();
    let expected = mmd_vstat(&AggregatedGram::new(&k, &xs, &ys).unwrap()).unwrap().value;

    for est in ["vstat", "monk_bcd"] {
        let o = run(monk()
            .args(["estimate", "--estimator", est, "--kernel", "rbf:sigma=1", "--x"])
            .arg(&xp)
            .arg("--y")
            .arg(&yp)
            .args(["--q", "1", "--t", "10", "--seed", "3"]));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
        assert!((v - expected).abs() < 1e-10);
    }

    let base = |est: &str, kernel: &str, x: &Path| {
        let mut c = monk();
        c.args(["estimate", "--estimator", est, "--kernel", kernel, "--x"])
            .arg(x)
            .arg("--y")
            .arg(&yp)
            .args(["--q", "5"]);
        c
    };
    assert_eq!(run(&mut base("vstat", "cubic", &xp)).status.code(), Some(2));
    assert_eq!(run(&mut base("median", "linear", &xp)).status.code(), Some(2));
    assert_eq!(run(&mut base("monk_bcd", "linear", &xp)).status.code(), Some(2));
    assert_eq!(run(&mut base("vstat", "linear", &dir.path().join("none.csv"))).status.code(), Some(3));
    let mut dropped = base("monk_bcd", "linear", &xp);
    dropped.arg("--drop-remainder");
    assert!(run(&mut dropped).status.success());
}

#[test]
fn dna_rows_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "d.json",
        r#"{"experiment": "dna", "kernel": "ssk:p=2,lambda=0.8,norm=1",
            "estimators": ["vstat", "monk_bcd_fast"], "N_list": [30], "Q_list": [2],
            "reps": 2, "B": 20, "pairs": ["EI-IE"], "seed": 4}"#,
    );
    let out = dir.path().join("d.csv");
    let o = run(monk().args(["dna", "--data"]).arg(splice()).arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("EI=767") && stderr.contains("IE=768"), "{stderr}");
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["pair", "N", "rep", "seed", "estimator", "mmd_hat", "q_hat", "diff", "error"]);
    assert_eq!(rows.len(), 1 + 2 * 2);
    assert!(rows[1..].iter().all(|r| r[0] == "EI-IE" && r[8].is_empty()));

    let missing = dir.path().join("nope.data");
    let o = run(monk().args(["dna", "--data"]).arg(&missing).arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dna_self_comparison_never_rejects() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "d.json",
        r#"{"experiment": "dna", "kernel": "ssk:p=2,lambda=0.8,norm=1",
            "estimators": ["vstat"], "N_list": [24], "Q_list": [1], "reps": 3, "B": 10,
            "pairs": ["EI-EI"], "same_sample": true}"#,
    );
    let out = dir.path().join("d.csv");
    let o = run(monk().args(["dna", "--data"]).arg(splice()).arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for r in &csv_rows(&out)[1..] {
        assert!(r[7].parse::<f64>().unwrap() <= 0.0);
    }
}
