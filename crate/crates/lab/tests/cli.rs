use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocycle-lab")).args(args).env("COCYCLE_LAB_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn lyapunov_on_constant_diagonal() {
    let o = lab(&["lyapunov", "--cocycle", "const-diag", "--scales", "1,2,4", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["n", "L1", "L2", "L3", "sumL", "det_integral"]);
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!((num(&row[1]) - 4f64.ln()).abs() < 1e-12);
        assert!((num(&row[2]) - 2f64.ln()).abs() < 1e-12);
        assert!(num(&row[3]).abs() < 1e-12);
    }
}

#[test]
fn svp_fuzz_finds_no_violation() {
    let o = lab(&["svp-fuzz", "--m", "3", "--tau", "1,2", "--chains", "1000", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.len() >= 2000);
    assert!(rows.iter().all(|r| r[7] == "true"));
}

#[test]
fn ledger_example() {
    let o = lab(&["ledger", "--gamma", "1", "--eta", "0.1", "--delta", "0.05", "--C", "10", "--n0", "100", "--n1", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert!((num(&rows[0][col("gamma1")]) - 0.05).abs() < 1e-15);
    assert!((num(&rows[0][col("eta1")]) - 0.1).abs() < 1e-15);
}

#[test]
fn every_subcommand_has_a_dry_run() {
    let runs: [&[&str]; 9] = [
        &["lyapunov", "--cocycle", "rotation"],
        &["ap-check"],
        &["svp-fuzz"],
        &["ldt", "--cocycle", "am-lambda3"],
        &["holder-probe", "--cocycle", "diag-dominant-gap", "--tau", "1,2"],
        &["oseledets", "--cocycle", "diag-dominant-gap", "--tau", "1,2"],
        &["ledger", "--gamma", "1", "--eta", "0.1", "--delta", "0.05", "--C", "10", "--n0", "100", "--n1", "10000"],
        &["jacobi-scan"],
        &["dioph"],
    ];
    for args in runs {
        let mut a = args.to_vec();
        a.extend(["--dry-run", "--format", "json"]);
        let o = lab(&a);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 0, "{args:?}");
        assert_eq!(v["summary"]["dry_run"], true);
        assert_eq!(v["version"], "v1");
    }
}

#[test]
fn dry_run_still_validates_inputs() {
    let o = lab(&["lyapunov", "--cocycle", "no-such-fixture", "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&["lyapunov", "--cocycle", "rotation", "--grid", "1", "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&["lyapunov", "--cocycle", "rotation", "--scales", "4,2", "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lab(&["ldt", "--cocycle", "am-lambda3", "--formula", "q1"]).status.code(), Some(1));
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn violated_inequality_exits_two() {
    // a negative slack demands a strict margin that exact sandwiches cannot meet
    let o = lab(&["svp-fuzz", "--chains", "3", "--slack=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("violation"));
}

#[test]
fn chain_file_is_checked() {
    let dir = std::env::temp_dir().join(format!("cocycle-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain.json");
    std::fs::write(&path, r#"{"tau": [1], "matrices": [[[100, 0], [0, 1]], [[100, 0], [0, 1]], [[100, 0], [0, 1]]]}"#).unwrap();
    let o = lab(&["ap-check", "--chain", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&stdout(&o));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows[0][col("admissible")], "true");
    assert!(num(&rows[0][col("d_plus")]).abs() < 1e-15);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_flag_writes_the_file() {
    let dir = std::env::temp_dir().join(format!("cocycle-lab-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dioph.csv");
    let o = lab(&["dioph", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("holds,worst_k,worst_ratio\ntrue,2,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn jacobi_scan_of_almost_mathieu_has_zero_trace() {
    let o = lab(&["jacobi-scan", "--lambdas", "0.5,3", "--energies", "0,1", "--n", "64", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["lambda", "E", "L1", "L2", "sumL"]);
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(num(&r[4]).abs() < 1e-10);
        assert!(num(&r[2]) >= -1e-12);
    }
}
