use std::fs;
use std::path::Path;
use std::process::Command;

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rumornet"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.conf",
        "engine = meanfield\nfamilies = final_size, time_series\n[network]\nnodes = 500\n[model]\nlambda = 0.5, 1.0\n[meanfield]\nt_end = 20\ndt = 0.05\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = cli(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
            "--workers",
            "2",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let ma = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert_eq!(ma, fs::read_to_string(b.join("manifest.txt")).unwrap());
    assert!(ma.contains("final_size.csv") && ma.contains("time_series.svg"));
    assert!(fs::read_to_string(a.join("final_size.csv"))
        .unwrap()
        .contains("# seed = 9"));
}

#[test]
fn generate_and_threshold_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.conf",
        "[network]\ngenerator = ba\nm0 = 4\nm = 2\nnodes = 200\n[model]\nlambda = 1\nalpha = 0.5, 1\n",
    );
    let out = dir.path().join("out");
    let o = cli(&["generate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("network_200.edges").exists());
    let o = cli(&[
        "threshold",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(out.join("threshold.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.conf", "[model]\nlambda = 1\nalpha = 1.5\n");
    let o = cli(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = cli(&[
        "simulate",
        "--config",
        dir.path().join("missing.conf").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write(dir.path(), "mf.conf", "[model]\nlambda = 1\n");
    let o = cli(&[
        "compare",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "blow.conf",
        "[network]\nnodes = 300\n[model]\nlambda = 1e300\n[meanfield]\nt_end = 2\ndt = 0.5\n",
    );
    let o = cli(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(fs::read_to_string(dir.path().join("o/manifest.txt"))
        .unwrap()
        .contains("failed meanfield"));
}

#[test]
fn compare_tolerance_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // A tolerance no stochastic ensemble can meet at a supercritical point.
    let cfg = write(
        dir.path(),
        "cmp.conf",
        "engine = both\n[network]\nnodes = 1000\n[model]\nlambda = 2\n[montecarlo]\nruns = 5\n[meanfield]\nt_end = 30\ndt = 0.05\n[run]\ntolerance = 1e-9\n",
    );
    let o = cli(&[
        "compare",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(dir.path().join("o/comparison.csv").exists());
}
