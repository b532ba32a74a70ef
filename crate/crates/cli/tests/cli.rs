use std::f64::consts::PI;
use std::process::{Command, Output};

fn spinqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinqec")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV document, skipping the config comment and header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn kl_scan_antipodal_passes() {
    let out = spinqec(&["kl-scan", "--j", "8", "--theta-max", "0.2", "--epsilon", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&stdout(&out));
    assert_eq!(doc["config"]["family"], "antipodal");
    assert!(doc["report"]["eps_star"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn kl_scan_half_integer_qudit_is_invalid() {
    let out = spinqec(&["kl-scan", "--family", "equatorial", "--d", "3", "--j", "3/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn kl_scan_identity_reports_gram() {
    let out = spinqec(&["kl-scan", "--family", "equatorial", "--j", "2", "--d", "3", "--errors", "identity"]);
    let doc = json(&stdout(&out));
    // Off-diagonal gram magnitude ((1 + cos 2π/3)/2)^2 = 1/16.
    let eps = doc["report"]["eps_star"].as_f64().unwrap();
    assert!((eps - 1.0 / 16.0).abs() < 1e-14);
    // The default threshold 1e-6 is missed: exit 1 with the report written.
    assert_eq!(out.status.code(), Some(1));
    let out = spinqec(&["kl-scan", "--family", "equatorial", "--j", "2", "--d", "3", "--errors", "identity", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn threshold_failure_still_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = spinqec(&["kl-scan", "--theta-max", "1.2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&std::fs::read_to_string(&path).unwrap());
    assert!(doc["report"]["eps_star"].as_f64().unwrap() > 1e-6);
}

#[test]
fn invalid_input_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = spinqec(&["gkp-table", "--K", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    assert_eq!(spinqec(&["harmonics", "--j", "1", "--lmax", "3/2"]).status.code(), Some(2));
    assert_eq!(spinqec(&["kl-scan", "--j", "abc"]).status.code(), Some(2));
}

#[test]
fn overlap_curve_endpoints_and_power_law() {
    let rows = |j: &str| -> Vec<(f64, f64)> {
        let out = spinqec(&["overlap-curve", "--j", j, "--steps", "9"]);
        assert_eq!(out.status.code(), Some(0));
        csv_rows(&stdout(&out)).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect()
    };
    let (a, b) = (rows("3"), rows("6"));
    assert_eq!(a.len(), 9);
    assert!(a[0].1.abs() < 1e-15);
    assert!((a[8].1 - 1.0).abs() < 1e-14);
    assert!((a[8].0 - PI).abs() < 1e-15);
    for (p, q) in a.iter().zip(&b) {
        assert!((p.1 * p.1 - q.1).abs() < 1e-14);
        assert!((p.1 - ((1.0 - p.0.cos()) / 2.0).powi(3)).abs() < 1e-14);
    }
    assert!(a.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn gkp_table_nine_corrected_rows() {
    let out = spinqec(&["gkp-table", "--K", "2", "--r1", "3", "--r2", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# config: "));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[4] == "true"));
}

#[test]
fn harmonics_match_low_degree_table() {
    let out = spinqec(&["harmonics", "--j", "0", "--lmax", "2", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 9 * 3);
    // Y^l_m(π/2, 0) with the Condon–Shortley phase.
    let expected = |l: i64, m: i64| -> f64 {
        let pi = PI;
        match (l, m) {
            (0, 0) => 0.5 / pi.sqrt(),
            (1, 0) => 0.0,
            (1, 1) => -(3.0 / (8.0 * pi)).sqrt(),
            (1, -1) => (3.0 / (8.0 * pi)).sqrt(),
            (2, 0) => -0.25 * (5.0 / pi).sqrt(),
            (2, 1) | (2, -1) => 0.0,
            (2, 2) | (2, -2) => 0.25 * (15.0 / (2.0 * pi)).sqrt(),
            _ => unreachable!(),
        }
    };
    let mut seen = 0;
    for r in rows {
        let theta: f64 = r[2].parse().unwrap();
        if (theta - PI / 2.0).abs() > 1e-15 {
            continue;
        }
        let (l, m): (i64, i64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let (re, im): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
        assert!((re - expected(l, m)).abs() < 1e-14, "l={l} m={m}: {re}");
        assert!(im.abs() < 1e-15);
        seen += 1;
    }
    assert_eq!(seen, 9);
}

#[test]
fn tail_check_rows() {
    let out = spinqec(&["tail-check", "--j", "100", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[1][0], "400");
    let out = spinqec(&["tail-check", "--j", "100", "--delta", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn recovery_sweep_is_json_lines_and_deterministic() {
    let args = ["recovery-sweep", "--j", "8", "--steps", "3", "--samples", "5", "--seed", "11"];
    let a = spinqec(&args);
    let b = spinqec(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 15);
    assert_eq!(json(lines[0])["config"]["seed"], 11);
    for l in &lines[1..] {
        let run = json(l);
        assert!(run["fidelity"].as_f64().unwrap() > 0.9);
    }
    let c = spinqec(&["recovery-sweep", "--j", "8", "--steps", "3", "--samples", "5", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"j": 4, "steps": 5, "family": "equatorial", "d": 3}"#).unwrap();
    let out = spinqec(&["overlap-curve", "--config", cfg.to_str().unwrap(), "--steps", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let echo = json(text.lines().next().unwrap().trim_start_matches("# config: "));
    assert_eq!(echo["steps"], 3);
    assert_eq!(echo["family"], "equatorial");
    assert_eq!(echo["d"], 3);
    assert_eq!(echo["j"].as_f64(), Some(4.0));
    assert_eq!(csv_rows(&text).len(), 3);

    std::fs::write(&cfg, r#"{"jj": 4}"#).unwrap();
    assert_eq!(spinqec(&["overlap-curve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout_and_omits_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let args = ["harmonics", "--j", "1/2", "--steps", "4"];
    let to_stdout = spinqec(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let to_file = spinqec(&with_out);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["kl-scan", "--family", "equatorial", "--j", "10", "--d", "4", "--samples", "9", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_spinqec")).args(args).env("SPINQEC_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_spinqec")).args(args).env("SPINQEC_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_spinqec")).args(args).env("SPINQEC_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
