use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn routeconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_routeconf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--out-dir", p(dir)];
    args.extend_from_slice(extra);
    ok(routeconf(&args));
}

fn train(dir: &Path, extra: &[&str]) -> String {
    let tax = dir.join("taxonomy.tsv");
    let corpus = dir.join("corpus.tsv");
    let mut args = vec![
        "train",
        "--taxonomy",
        p(&tax),
        "--corpus",
        p(&corpus),
        "--out-dir",
        p(dir),
    ];
    args.extend_from_slice(extra);
    ok(routeconf(&args))
}

#[test]
fn generate_writes_requested_corpus_size() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &["--depth", "2", "--branching", "3", "--docs-per-leaf", "10"],
    );
    let corpus = fs::read_to_string(dir.path().join("corpus.tsv")).unwrap();
    assert_eq!(corpus.lines().count(), 90);
    let taxonomy = fs::read_to_string(dir.path().join("taxonomy.tsv")).unwrap();
    assert_eq!(taxonomy.lines().count(), 3 + 9);
}

#[test]
fn noise_outside_unit_interval_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = routeconf(&["generate", "--noise", "1.5", "--out-dir", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--noise"));
    assert!(!dir.path().join("corpus.tsv").exists());
}

#[test]
fn missing_corpus_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--depth", "1"]);
    let missing = dir.path().join("nope.tsv");
    let out = routeconf(&[
        "train",
        "--taxonomy",
        p(&dir.path().join("taxonomy.tsv")),
        "--corpus",
        p(&missing),
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(p(&missing)));
}

#[test]
fn manual_threshold_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &["--depth", "2", "--docs-per-leaf", "10", "--noise", "0.3"],
    );
    let stdout = train(dir.path(), &["--threshold", "0.5"]);
    assert!(stdout.contains("(manual)"), "{stdout}");
    let cal = fs::read_to_string(dir.path().join("calibration.json")).unwrap();
    assert!(cal.contains("\"manual\""), "{cal}");
}

#[test]
fn binary_mode_needs_a_policy() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--depth", "1", "--docs-per-leaf", "10"]);
    let tax = dir.path().join("taxonomy.tsv");
    let corpus = dir.path().join("corpus.tsv");
    let base = [
        "train",
        "--taxonomy",
        p(&tax),
        "--corpus",
        p(&corpus),
        "--out-dir",
        p(dir.path()),
    ];
    let out = routeconf(&[&base[..], &["--mode", "binary"]].concat());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--policy"));
    train(dir.path(), &["--mode", "binary", "--policy", "siblings"]);
}

#[test]
fn classify_and_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(
        d,
        &["--depth", "2", "--docs-per-leaf", "20", "--noise", "0.3"],
    );
    train(d, &[]);
    let (tax, model, cal) = (
        d.join("taxonomy.tsv"),
        d.join("model.json"),
        d.join("calibration.json"),
    );
    let classify = |input: &Path, extra: &[&str]| {
        let mut args = vec![
            "classify",
            "--taxonomy",
            p(&tax),
            "--model",
            p(&model),
            "--calibration",
            p(&cal),
            "--input",
            p(input),
        ];
        args.extend_from_slice(extra);
        ok(routeconf(&args))
    };

    let empty = d.join("empty.tsv");
    fs::write(&empty, "").unwrap();
    assert_eq!(classify(&empty, &[]), "");

    let input = d.join("input.tsv");
    fs::write(&input, "q1\tt1w0 t2w1 t1w2\nq2\tn0-0\tnoise3 t5w0 t6w1\n").unwrap();
    let out = classify(&input, &["--accept-all"]);
    let lines: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0][0], "q1");
    assert_eq!(lines[0][1], "n0-0");
    assert_eq!(lines[1][0], "q2");
    assert!(lines.iter().all(|l| l.len() == 4 && l[3] == "ACCEPT"));

    let stdout = ok(routeconf(&[
        "evaluate",
        "--taxonomy",
        p(&tax),
        "--corpus",
        p(&d.join("corpus.tsv")),
        "--model",
        p(&model),
        "--calibration",
        p(&cal),
        "--problem",
        "demo",
        "--out-dir",
        p(d),
    ]));
    assert!(stdout.contains("demo"));
    let summary = fs::read_to_string(d.join("summary.csv")).unwrap();
    assert!(summary.starts_with("problem,rejected,TR,FR,accuracy_boost\ndemo,"));
    let comparison = fs::read_to_string(d.join("comparison.csv")).unwrap();
    assert!(comparison.starts_with("problem,flat,LCN,proposed\ndemo,"));
}

#[test]
fn evaluate_rejects_a_different_split() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, &["--depth", "1", "--docs-per-leaf", "20"]);
    train(d, &[]);
    let out = routeconf(&[
        "evaluate",
        "--taxonomy",
        p(&d.join("taxonomy.tsv")),
        "--corpus",
        p(&d.join("corpus.tsv")),
        "--model",
        p(&d.join("model.json")),
        "--calibration",
        p(&d.join("calibration.json")),
        "--val-fraction",
        "0.1",
        "--out-dir",
        p(d),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("vocabulary mismatch"));
}
