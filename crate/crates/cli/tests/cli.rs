use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-est"))
        .args(args)
        .env("RIS_EST_THREADS", "2")
        .output()
        .expect("spawn ris-est")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: [&str; 6] = ["--preset", "desk", "--users", "2", "--pilots", "48"];

fn small(extra: &[&str]) -> Vec<String> {
    SMALL.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_small(sub: &str, extra: &[&str]) -> Output {
    let mut args = vec![sub.to_string()];
    args.extend(small(extra));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn sweep_has_one_row_per_value_and_algorithm() {
    let o = run_small(
        "sweep",
        &["--axis", "snr_db", "--values", "-10,0,10", "--trials", "2", "--algorithms", "pci,uamp_sbl,omp"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis,axis_value,algorithm,nmse_mean,nmse_stderr,trials,runtime_ms_mean,iters_mean");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[1..].iter().all(|l| l.starts_with("snr_db,") && l.split(',').count() == 8));
}

#[test]
fn estimate_is_deterministic() {
    let a = run_small("estimate", &["--seed", "7"]);
    let b = run_small("estimate", &["--seed", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.starts_with("algorithm,nmse,nmse_db,iters_mean\n"));
}

#[test]
fn generate_then_estimate_from_dump_matches_fresh_draw() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("trial.csv");
    let dump = dump.to_str().unwrap();
    let g = run_small("generate", &["--seed", "3", "--trial", "2", "--out", dump]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    assert!(fs::read_to_string(dump).unwrap().starts_with("ris-est-dump,1\n"));
    let from_dump = run_small("estimate", &["--input", dump, "--algorithms", "pci,oracle_ls"]);
    let fresh = run_small("estimate", &["--seed", "3", "--trial", "2", "--algorithms", "pci,oracle_ls"]);
    assert!(from_dump.status.success(), "{}", String::from_utf8_lossy(&from_dump.stderr));
    assert_eq!(from_dump.stdout, fresh.stdout);
}

#[test]
fn bench_rows_per_path_count() {
    let o = run_small("bench", &["--paths", "4,10", "--trials", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for alg in ["pci", "omp"] {
        assert_eq!(rows.iter().filter(|r| r.split(',').nth(2) == Some(alg)).count(), 2);
    }
}

#[test]
fn flags_override_file_and_config_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# experiment\npreset = desk\nusers = 16\npilots = 48\n").unwrap();
    let o = run(&["estimate", "--config", path.to_str().unwrap(), "--users", "2", "--algorithms", "oracle_ls"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = String::from_utf8(o.stderr).unwrap();
    assert!(log.lines().any(|l| l == "users = 2"), "{log}");
    assert!(log.lines().any(|l| l == "pilots = 48"));
    assert!(log.lines().any(|l| l == "bs_rows = 4"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "users = 2\n\ncolour = red\n").unwrap();
    let o = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");

    let o = run(&["sweep", "--pilots", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("pilots"));

    let o = run(&["sweep", "--config", "/nonexistent/ris.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.csv");
    fs::write(&path, "ris-est-dump,1\nmatrix,sensing,0,1,2\n1,2,3\n").unwrap();
    let o = run_small("estimate", &["--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 3"));
}

#[test]
fn sweep_without_timing_is_byte_identical() {
    let args = ["--values", "0,10", "--trials", "3", "--algorithms", "pci,omp", "--timing", "false"];
    let a = run_small("sweep", &args);
    let b = run_small("sweep", &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().skip(1).all(|l| l.split(',').nth(6) == Some("0.000000000e0")));
}
