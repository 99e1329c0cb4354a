use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stargabor"))
        .args(args)
        .current_dir(dir)
        .env_remove("STARGABOR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn admissible_prints_length_and_factors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["admissible", "34"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "33 = 3 · 11");
    let o = run(&["admissible", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["window", "--kind", "star"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["experiment", "--nope"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--K", "3", "--a", "1", "--b", "1"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["experiment", "--preset", "nothing"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_lists_paper_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "--help"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("[default: 0.001]"));
    assert!(text.contains("--preset"));
    assert!(text.contains("--C"));
}

#[test]
fn window_then_dgt_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["window", "--kind", "hann", "--L", "33", "--out", "g.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let x: String = std::iter::once("value".to_string())
        .chain((0..33).map(|i| format!("{}", (i as f64).cos())))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(dir.path().join("x.csv"), x).unwrap();
    let o = run(
        &[
            "dgt",
            "--window",
            "g.csv",
            "--a",
            "1",
            "--b",
            "11",
            "--in",
            "x.csv",
            "--out",
            "c.csv",
            "--positive",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let coeffs = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 1 + 2 * 33);

    std::fs::write(dir.path().join("short.csv"), "value\n1\n2\n3\n").unwrap();
    let o = run(
        &[
            "dgt",
            "--window",
            "g.csv",
            "--a",
            "1",
            "--b",
            "11",
            "--in",
            "short.csv",
            "--out",
            "c.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
}

#[test]
fn spark_reports_deficient_star_frame() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "spark", "--L", "3", "--a", "1", "--b", "1", "--window", "star", "--json", "s.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("spark           : 3"));
    assert!(text.contains("exhaustive      : true"));
    assert!(dir.path().join("s.json").exists());
}

#[test]
fn solve_with_full_sampling_is_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "solve", "--preset", "cusp", "--K", "33", "--out", "xhat.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("relative error"))
        .unwrap()
        .to_string();
    let err: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err < 1e-2, "{line}");
    assert!(dir.path().join("xhat.csv").exists());
}

#[test]
fn experiment_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |csv: &'static str| {
        vec![
            "experiment",
            "--signal",
            "cusp",
            "--L",
            "33",
            "--a",
            "1",
            "--b",
            "11",
            "--points",
            "20",
            "--reps",
            "10",
            "--seed",
            "7",
            "--csv",
            csv,
        ]
    };
    let first = run(&args("one.csv"), dir.path());
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = run(
        &[args("two.csv"), vec!["--threads", "1"]].concat(),
        dir.path(),
    );
    assert!(second.status.success());
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("one.csv"), read("two.csv"));
    assert_eq!(read("one.svg"), read("two.svg"));
    let csv = String::from_utf8(read("one.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 20);
    assert!(dir.path().join("one.json").exists());
}
