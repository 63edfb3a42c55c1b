use std::fs;
use std::path::Path;
use std::process::Command;

const CONFIG: &str = "M = 64\nN = 2\ntrials = 100\nseed = 3\ntheta_ar = grid\ntheta_br = grid\n";

fn mmrelay(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mmrelay")).args(args).output().unwrap()
}

fn write_config(dir: &Path) -> String {
    let p = dir.join("test.conf");
    fs::write(&p, CONFIG).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn report_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    let o = mmrelay(&["report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("exact") && stdout.contains("approx"), "{stdout}");
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("M,N,evaluator,pair,R1,R2,R,sum_SE,seed,trials"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn seed_flag_changes_exact_rows_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = mmrelay(&["report", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        fs::read_to_string(out.join("report.csv")).unwrap()
    };
    let (a, b, c) = (run("1", "a"), run("1", "b"), run("2", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    // Closed-form rows differ only in the seed column.
    let approx = |s: &str| -> Vec<String> {
        s.lines().filter(|l| l.contains(",approx,")).map(|l| l.split(',').take(8).collect::<Vec<_>>().join(",")).collect()
    };
    assert_eq!(approx(&a).len(), 3);
    assert_eq!(approx(&a), approx(&c));
}

#[test]
fn sweep_grid_and_evaluator_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("o");
    let o = mmrelay(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "32,64", "--eval", "approx"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    for args in [
        vec!["sweep", "--config", &cfg, "--out", out, "--grid", ""],
        vec!["sweep", "--config", &cfg, "--out", out, "--grid", "64,32"],
        vec!["report", "--config", "/nonexistent/file.conf"],
        vec!["report"],
        vec!["bogus", "--config", &cfg],
        vec!["sweep", "--config", &cfg, "--var", "K_dB"],
    ] {
        let o = mmrelay(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "M = twelve\n").unwrap();
    let o = mmrelay(&["report", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn check_passes() {
    let o = mmrelay(&["check", "--trials", "500", "--threads", "0"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains("0 failed"));
}

#[test]
fn help_exits_zero() {
    assert!(mmrelay(&["--help"]).status.success());
}
