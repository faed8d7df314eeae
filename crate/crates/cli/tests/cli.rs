//! End-to-end CLI checks: staged pipeline, exit codes, and artifact shapes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ballkit")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ballkit-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("tmp dir");
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("BALLKIT_OUTPUT_DIR")
        .output()
        .expect("spawn ballkit")
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().expect("exit code");
    assert_eq!(
        got,
        want,
        "exit code {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// The staged pipeline matches a one-shot `run` on the same configuration.
#[test]
fn staged_pipeline_produces_solution() {
    let dir = tmpdir("staged");
    let dirs = dir.to_str().expect("utf8 path");
    // small problem so the whole chain stays quick
    let common = ["-s", "l=8", "-s", "p=8", "-s", "seed=3", "--out", dirs];
    let mut args = vec!["simulate"];
    args.extend_from_slice(&common);
    assert_code(&run(&args), 0);
    assert!(dir.join("truth.blc").exists());

    let mut args = vec!["degrade"];
    args.extend_from_slice(&common);
    assert_code(&run(&args), 0);
    assert!(dir.join("observations.blc").exists());
    assert!(dir.join("mask.blc").exists());
    let meta = std::fs::read_to_string(dir.join("meta.txt")).expect("meta");
    assert!(meta.contains("sigma ="));

    let mut args = vec!["solve", "-s", "max_iter=200"];
    args.extend_from_slice(&common);
    assert_code(&run(&args), 0);
    assert!(dir.join("x_map.blc").exists());
    assert!(dir.join("x_dir.blc").exists());
    let trace = std::fs::read_to_string(dir.join("trace.csv")).expect("trace");
    assert!(trace.starts_with("iteration,objective,step,lambda"));

    // hypothesis test on a block region
    let mut args = vec!["uq", "test", "--region", "1:4,2:6,2:6", "--alpha", "0.05"];
    args.extend_from_slice(&common);
    let out = run(&args);
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("outcome:"), "missing outcome in {text}");

    // local credible intervals over a coarse partition
    let mut args = vec!["uq", "lci", "--blocks", "4,4,15", "--alpha", "0.05"];
    args.extend_from_slice(&common);
    assert_code(&run(&args), 0);
    let lci = std::fs::read_to_string(dir.join("lci.csv")).expect("lci");
    assert!(lci.starts_with("region,lower,upper,width"));
    assert!(lci.lines().count() > 1);

    std::fs::remove_dir_all(&dir).expect("cleanup");
}

#[test]
fn run_writes_all_artifacts_and_is_deterministic() {
    let dir = tmpdir("run");
    let dir_a = dir.join("a");
    let dir_b = dir.join("b");
    for d in [&dir_a, &dir_b] {
        let args = [
            "run",
            "-s",
            "l=8",
            "-s",
            "p=8",
            "-s",
            "seed=2",
            "-s",
            "slice_nodes=2,5",
            "--out",
            d.to_str().expect("utf8"),
        ];
        assert_code(&run(&args), 0);
    }
    for file in [
        "truth.blc",
        "observations.blc",
        "mask.blc",
        "x_dir.blc",
        "x_map.blc",
        "x_surrogate.blc",
        "trace.csv",
        "slice_p02.csv",
        "slice_p05.csv",
    ] {
        let a = std::fs::read(dir_a.join(file)).unwrap_or_else(|_| panic!("missing {file}"));
        let b = std::fs::read(dir_b.join(file)).expect("file b");
        assert_eq!(a, b, "{file} not deterministic");
    }
    // the report matches too, apart from its wall-clock line
    let strip = |p: &std::path::Path| -> String {
        std::fs::read_to_string(p)
            .expect("report")
            .lines()
            .filter(|l| !l.starts_with("wall_secs"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&dir_a.join("report.txt")), strip(&dir_b.join("report.txt")));
    std::fs::remove_dir_all(&dir).expect("cleanup");
}

#[test]
fn output_dir_env_override_wins() {
    let dir = tmpdir("env");
    let out = Command::new(bin())
        .args(["simulate", "-s", "l=6", "-s", "p=5", "--out", "/nonexistent-should-not-be-used"])
        .env("BALLKIT_OUTPUT_DIR", &dir)
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("truth.blc").exists());
    std::fs::remove_dir_all(&dir).expect("cleanup");
}

#[test]
fn exit_codes_match_error_classes() {
    let dir = tmpdir("codes");
    let dirs = dir.to_str().expect("utf8");

    // usage error: unknown flag
    assert_code(&run(&["simulate", "--no-such-flag"]), 1);
    // usage error: bad config value
    assert_code(&run(&["simulate", "-s", "l=banana", "--out", dirs]), 1);
    // usage error: bad region spec after a valid solve directory exists
    assert_code(&run(&["simulate", "-s", "l=6", "-s", "p=5", "--out", dirs]), 0);

    // i/o error: reading a missing observations file
    let mut args = vec!["solve", "--out", dirs, "-s", "l=6", "-s", "p=5", "--sigma", "0.1"];
    assert_code(&run(&args), 3);

    // i/o error: corrupted magic bytes
    let truth = dir.join("truth.blc");
    let mut bytes = std::fs::read(&truth).expect("truth bytes");
    bytes[0] = b'Z';
    std::fs::write(dir.join("bad.blc"), &bytes).expect("write bad");
    args = vec![
        "degrade",
        "--truth",
        "bad.blc",
        "--out",
        dirs,
        "-s",
        "l=6",
        "-s",
        "p=5",
    ];
    let bad_path = dir.join("bad.blc");
    let bad = bad_path.to_str().expect("utf8");
    args[2] = bad;
    assert_code(&run(&args), 3);

    std::fs::remove_dir_all(&dir).expect("cleanup");
}

/// Bench subcommand emits per-size timings and a fitted exponent.
#[test]
fn bench_reports_exponent() {
    let out = run(&["bench", "--sizes", "4,8", "--reps", "2"]);
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fitted time ~ L^"), "missing fit in {text}");
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tmpdir("config");
    let cfg_path = dir.join("experiment.cfg");
    std::fs::write(
        &cfg_path,
        "l = 6\np = 5\nseed = 9\nmask_fraction = 0.8 # hash comment\n",
    )
    .expect("write cfg");
    let args = [
        "simulate",
        "--config",
        cfg_path.to_str().expect("utf8"),
        "-s",
        "seed=11", // override the file
        "--out",
        dir.to_str().expect("utf8"),
    ];
    assert_code(&run(&args), 0);
    let written = std::fs::read_to_string(dir.join("config.txt")).expect("config echo");
    assert!(written.contains("seed = 11"));
    assert!(written.contains("mask_fraction = 0.8"));
    std::fs::remove_dir_all(&dir).expect("cleanup");
}

