use std::process::{Command, Output};

fn ifstile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifstile"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(ifstile(&["preset"]).status.code(), Some(0));
    assert_eq!(ifstile(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ifstile(&["tile", "no-such-preset"]).status.code(), Some(1));
    assert_eq!(ifstile(&["tile", "overlap1d", "-l", "3", "--check"]).status.code(), Some(2));
    assert_eq!(ifstile(&["tile", "chair", "-l", "10", "--budget", "100"]).status.code(), Some(3));
    assert_eq!(ifstile(&["--help"]).status.code(), Some(0));
}

#[test]
fn interval_svg_has_two_to_the_k_rectangles() {
    let a = ifstile(&["tile", "interval", "--theta", "(1)", "-l", "6"]);
    assert!(a.status.success());
    let svg = stdout(&a);
    assert_eq!(svg.matches("<rect data-key").count(), 64);
    let b = ifstile(&["tile", "interval", "--theta", "(1)", "-l", "6"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn svg_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.svg");
    let p2 = dir.path().join("b.svg");
    for p in [&p1, &p2] {
        let o = ifstile(&["tile", "chair", "--theta", "(1234)", "-l", "4", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn dumped_preset_reloads_with_same_tiles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chair.toml");
    let o = ifstile(&["preset", "chair", "--out", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let from_preset = ifstile(&["tile", "chair", "--theta", "(1234)", "-l", "3", "--format", "records"]);
    let from_file = ifstile(&["tile", cfg.to_str().unwrap(), "--theta", "(1234)", "-l", "3", "--format", "records"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(from_preset.stdout, from_file.stdout);
}

#[test]
fn gifs_penrose_svg_and_check() {
    let o = ifstile(&["gifs-tile", "penrose", "--theta", "(2351)", "-l", "4", "--check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("<path"));
    let bad = ifstile(&["gifs-tile", "penrose", "--theta", "(14)", "-l", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn masked_overlapping_interval_is_clean() {
    let o = ifstile(&["mask-tile", "overlap1d", "--steps", "4", "--check", "--format", "records"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().count() > 1);
}

#[test]
fn fast_basin_and_points() {
    let o = ifstile(&["fast-basin", "interval", "-d", "2"]);
    assert!(o.status.success());
    assert!(!stdout(&o).trim().is_empty());
    let o = ifstile(&["transform", "foldout", "foldout", "--point", "0.3,0.4"]);
    assert!(o.status.success());
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: Vec<f64> = last.split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert!((v[0] - 0.3).abs() < 1e-2 && (v[1] - 0.4).abs() < 1e-2);
}

#[test]
fn check_word_reports() {
    let o = ifstile(&["check-word", "disjunctive", "-n", "2", "--sigma", "11", "--scan", "1000000"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("occurs twice"), "{s}");
    assert!(s.contains("VerifiedStrong"), "{s}");
}
