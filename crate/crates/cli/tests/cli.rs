use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motion-vision"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_openloop_from_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let out = cli(&["--out-dir", path(&frames), "gen", "--kind", "trans-r", "--speed", "12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(frames.join("manifest.txt")).unwrap();
    assert!(manifest.contains("kind=trans-r"));
    assert!(frames.join("frame_00000.pgm").exists());

    let run = dir.path().join("run");
    let out = cli(&["--out-dir", path(&run), "openloop", "--frames", path(&frames)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let telemetry = std::fs::read_to_string(run.join("telemetry.csv")).unwrap();
    let mut lines = telemetry.lines();
    assert_eq!(lines.next(), Some("# schema=telemetry/1"));
    assert!(lines.next().unwrap().starts_with("frame,u_lgmd1,u_lgmd2,u_dsn,"));
    let frame_count = manifest
        .lines()
        .find_map(|l| l.strip_prefix("frame_count="))
        .unwrap()
        .parse::<usize>()
        .unwrap();
    assert_eq!(lines.count(), frame_count);
    assert!(std::fs::read_to_string(run.join("summary.csv")).unwrap().contains("spikes_dsn_r,"));
}

#[test]
fn openloop_generated_course_with_model_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "--out-dir",
        path(dir.path()),
        "--model",
        "lgmd2",
        "openloop",
        "--kind",
        "looming",
        "--speed",
        "12",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("lgmd1=0"), "{stdout}");
    assert!(stdout.contains("dsn_r=0 dsn_l=0"), "{stdout}");
}

#[test]
fn arena_writes_logs_and_respects_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = cli(&[
            "--out-dir",
            path(&out_dir),
            "--seed",
            seed,
            "arena",
            "--robots",
            "2",
            "--seconds",
            "5",
            "--trajectory",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a", "9");
    let b = run("b", "9");
    let c = run("c", "10");
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "events.csv"), read(&b, "events.csv"));
    assert_eq!(read(&a, "trajectory.csv"), read(&b, "trajectory.csv"));
    assert_ne!(read(&a, "trajectory.csv"), read(&c, "trajectory.csv"));
    let params = String::from_utf8(read(&a, "params.txt")).unwrap();
    assert!(params.contains("rng_seed = 9") || params.contains("rng_seed=9"), "{params}");
    assert!(String::from_utf8(read(&a, "metrics.csv")).unwrap().starts_with("metric,value"));
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "# smaller frames\nframe_w = 40\nframe_h = 30\n").unwrap();
    let frames = dir.path().join("f");
    let out = cli(&["--config", path(&cfg), "--out-dir", path(&frames), "gen", "--kind", "looming", "--speed", "12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let head = std::fs::read(frames.join("frame_00000.pgm")).unwrap();
    assert!(head.starts_with(b"P5"));
    assert!(String::from_utf8_lossy(&head[..20]).contains("40 30"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    for args in [
        vec!["--config", path(&missing), "bench", "--seconds", "0.1"],
        vec!["bench", "--seconds", "0"],
        vec!["gen", "--kind", "spiral"],
        vec!["openloop", "--frames", path(dir.path())],
        vec!["arena", "--robots", "1000", "--seconds", "1"],
        vec!["--model", "lgmd3", "bench"],
    ] {
        let out = cli(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn openloop_rejects_mismatched_frames() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "frame_w = 40\nframe_h = 30\n").unwrap();
    let frames = dir.path().join("f");
    assert!(cli(&["--config", path(&cfg), "--out-dir", path(&frames), "gen", "--kind", "trans-l", "--speed", "12"])
        .status
        .success());
    let out = cli(&["--out-dir", path(&dir.path().join("o")), "openloop", "--frames", path(&frames)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn bench_reports_fps() {
    let out = cli(&["bench", "--seconds", "0.3"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("fps"));
}
