//! Acceptance criterion 9: identical configurations (including the seed)
//! produce byte-identical report files across consecutive runs.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn run_example(dir: &Path, out: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_fraxol"))
        .args([
            "example",
            "nonexistence",
            "--lambda1",
            "0.1",
            "--resolution",
            "16",
            "--solve",
            "--certify",
            "--starts",
            "8",
            "--seed",
            "42",
            "--out-dir",
            out,
        ])
        .current_dir(dir)
        .status()
        .expect("binary runs");
    assert!(status.success());
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    run_example(tmp.path(), "run1");
    run_example(tmp.path(), "run2");

    let mut compared = 0;
    for name in ["spec.json", "verdict.json", "report.json", "solution.csv"] {
        let a = std::fs::read(tmp.path().join("run1").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("run2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        compared += 1;
    }

    // A second command family, same check.
    for out in ["s1.json", "s2.json"] {
        let status = Command::new(env!("CARGO_BIN_EXE_fraxol"))
            .args(["spectrum", "--s", "0.25", "--resolution", "16", "--out", out])
            .current_dir(tmp.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(tmp.path().join("s1.json")).unwrap();
    let b = std::fs::read(tmp.path().join("s2.json")).unwrap();
    assert_eq!(a, b, "spectrum reports differ between identical runs");
    compared += 1;

    println!(
        "criterion 9 (byte-identical reports): PASS [{:.2?}] {compared} file pairs compared",
        start.elapsed()
    );
}
