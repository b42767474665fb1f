use std::path::Path;
use std::process::{Command, Output};

use nls_lab::config::{ExperimentConfig, InitialData, Preset};
use nls_lab::run::{execute, initial_field, TRACE_FILE};

fn nlslab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .args(args)
        .env("NLSLAB_OUTPUT_DIR", out)
        .env("NLSLAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn evolve_into(dir: &Path, horizon: &str) -> Output {
    nlslab(
        &["evolve", "--preset", "custom", "--horizon", horizon, "--run-dir", dir.to_str().unwrap()],
        dir,
    )
}

#[test]
fn zero_horizon_writes_a_single_row_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = evolve_into(&dir, "0");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join(TRACE_FILE)).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}

#[test]
fn identical_configs_give_identical_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let out = evolve_into(d, "0.2");
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = std::fs::read(a.join(TRACE_FILE)).unwrap();
    let tb = std::fs::read(b.join(TRACE_FILE)).unwrap();
    assert!(ta.len() > 200);
    assert_eq!(ta, tb);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nlslab(&["evolve", "--no-such-flag"], tmp.path()).status.code(), Some(2));
    let out = nlslab(&["groundstate", "--kind", "frac", "--p1", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(nlslab(&["sweep", "--preset", "custom", "--axis", "bogus=1"], tmp.path()).status.code(), Some(2));
}

#[test]
fn tampered_run_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    assert_eq!(evolve_into(&dir, "0.01").status.code(), Some(0));
    std::fs::write(dir.join(TRACE_FILE), "time,mass\n0,1\n").unwrap();
    let out = nlslab(&["diagnose", dir.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let missing = tmp.path().join("nothing-here");
    assert_eq!(nlslab(&["diagnose", missing.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}

#[test]
fn seeded_random_data_is_reproducible() {
    let mut cfg = ExperimentConfig::preset(Preset::Custom);
    cfg.grid.points = 256;
    cfg.horizon = 0.05;
    cfg.initial = InitialData::RandomBumps { count: 3, amplitude: 0.5 };
    cfg.seed = 7;
    let u1 = initial_field(&cfg, None).unwrap();
    assert_eq!(u1, initial_field(&cfg, None).unwrap());
    let r1 = execute(&cfg, None).unwrap();
    let r2 = execute(&cfg, None).unwrap();
    assert_eq!(r1.trace.energy, r2.trace.energy);
    cfg.seed = 8;
    assert_ne!(u1, initial_field(&cfg, None).unwrap());
}
