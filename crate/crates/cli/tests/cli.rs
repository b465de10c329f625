//! End-to-end checks of the command-line contract: exit codes, partial
//! results, and manifest verification.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_oblate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> std::process::Output {
    let mut full = vec!["--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    run(&full)
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["equilibrium", "--n", "0", "--v-ring", "46.3"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["equilibrium", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["modes", "--n", "3", "--v-ring", "50", "--ring-min", "40"]);
    assert_eq!(out.status.code(), Some(2), "conflicting sweep flags");
}

#[test]
fn unstable_operating_point_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["equilibrium", "--n", "3", "--v-ring", "200"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "diagnostic goes to stderr: {stderr}");
}

#[test]
fn sweep_crossing_instability_exits_4_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "modes",
            "--n",
            "3",
            "--v-top",
            "100",
            "--v-bottom",
            "100",
            "--ring-min",
            "114",
            "--ring-max",
            "119",
            "--ring-step",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(dir.path().join("modes.csv").exists());
    assert!(dir.path().join("modes.manifest.json").exists());
}

#[test]
fn resonant_detuning_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "couplings",
            "--n",
            "3",
            "--v-ring",
            "46.3",
            "--v-top",
            "50",
            "--v-bottom",
            "50",
            "--mu",
            "1.0,2.0",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "one detuning sits on a mode");
}

#[test]
fn empty_detuning_list_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "couplings",
            "--n",
            "3",
            "--v-ring",
            "46.3",
            "--v-top",
            "50",
            "--v-bottom",
            "50",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("couplings.json").exists());
}

#[test]
fn manifest_check_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let solve_args = [
        "equilibrium",
        "--n",
        "3",
        "--v-ring",
        "46.3",
        "--v-top",
        "50",
        "--v-bottom",
        "50",
    ];
    assert_eq!(run_in(dir.path(), &solve_args).status.code(), Some(0));

    let mut check_args = vec!["--check"];
    check_args.extend_from_slice(&solve_args);
    let ok = run_in(dir.path(), &check_args);
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("ok"), "clean check reports ok: {stdout}");

    let crystal = dir.path().join("crystal.csv");
    let mut bytes = std::fs::read(&crystal).unwrap();
    bytes.push(b'#');
    std::fs::write(&crystal, bytes).unwrap();
    let tampered = run_in(dir.path(), &check_args);
    assert_eq!(tampered.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&tampered.stdout);
    assert!(stdout.contains("MISMATCH"), "tampering is named: {stdout}");

    std::fs::remove_file(&crystal).unwrap();
    let missing = run_in(dir.path(), &check_args);
    assert_eq!(missing.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&missing.stdout);
    assert!(stdout.contains("MISSING"), "missing file is named: {stdout}");
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("trap.cfg");
    std::fs::write(
        &config,
        "# lighter ion, same trap\nmass = 40 u\ncharge = 1 e\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "--config",
            config.to_str().unwrap(),
            "equilibrium",
            "--n",
            "2",
            "--v-ring",
            "46.3",
            "--v-top",
            "50",
            "--v-bottom",
            "50",
        ],
    );
    assert_eq!(out.status.code(), Some(0));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "--config",
            bad.to_str().unwrap(),
            "equilibrium",
            "--n",
            "2",
            "--v-ring",
            "46.3",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "config errors are usage errors");
}
