use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bibc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bibc"))
        .args(args)
        .output()
        .expect("spawn bibc")
}

fn ok(args: &[&str]) -> String {
    let out = bibc(args);
    assert!(
        out.status.success(),
        "bibc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn summary_matches_reference_captions() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "summary",
        "--out",
        p(dir.path()),
        "--alpha=-inf",
        "--alpha",
        "33",
        "--alpha",
        "39.2",
    ]);
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut rows = text.lines();
    assert_eq!(
        rows.next().unwrap(),
        "method,alpha_db,eta_db,pg_bde_db,objective_db"
    );
    let rows: Vec<Vec<&str>> = rows.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[0][..2], &["mrt", ""]);
    assert_eq!(&rows[1][..3], &["null", "-inf", "-inf"]);
    let pg: f64 = rows[1][3].parse().unwrap();
    assert!((pg + 45.9).abs() < 1.0);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn pe_is_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &str, workers: &'static str| {
        vec![
            "--workers".to_string(),
            workers.to_string(),
            "pe".into(),
            "--out".into(),
            out.to_string(),
            "--alpha".into(),
            "20".into(),
            "--snr-min=-30".into(),
            "--snr-max=-20".into(),
            "--snr-step".into(),
            "5".into(),
            "--trials".into(),
            "40000".into(),
            "--seed".into(),
            "42".into(),
        ]
    };
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    run(args(p(a.path()), "1"));
    run(args(p(b.path()), "4"));
    let csv_a = fs::read(a.path().join("pe.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.path().join("pe.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.lines().nth(1).unwrap().contains(",40000,"));
}

#[test]
fn replay_reproduces_output() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let scene = first.path().join("scene.toml");
    fs::write(
        &scene,
        "bde_position = [1.5, 2.0, 0.0]\nalphas_db = [18.2]\n",
    )
    .unwrap();
    ok(&[
        "pattern",
        "--scene",
        p(&scene),
        "--out",
        p(first.path()),
        "--theta-step",
        "2",
    ]);
    // the replay must not depend on the scene file still existing
    fs::remove_file(&scene).unwrap();
    ok(&["replay", p(first.path()), "--out", p(second.path())]);
    let a = fs::read(first.path().join("pattern.csv")).unwrap();
    assert_eq!(a, fs::read(second.path().join("pattern.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "theta_deg,method,alpha_db,et_db"
    );
    assert_eq!(text.lines().count(), 1 + 2 * 180);
}

#[test]
fn pe_without_trials_leaves_monte_carlo_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "pe",
        "--out",
        p(dir.path()),
        "--alpha",
        "30",
        "--snr-min=-20",
        "--snr-max=-19",
    ]);
    let text = fs::read_to_string(dir.path().join("pe.csv")).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",,0,"), "{line}");
    }
}

#[test]
fn pgmap_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "pgmap",
        "--out",
        p(dir.path()),
        "--alpha",
        "33",
        "--step",
        "0.5",
        "--x-min=-1",
        "--x-max",
        "1",
        "--y-min",
        "1",
        "--y-max",
        "3",
    ]);
    let text = fs::read_to_string(dir.path().join("pgmap.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "x_m,y_m,method,alpha_db,pg_db"
    );
    assert_eq!(text.lines().count(), 1 + 2 * 5 * 5);
    assert!(text.contains("\n0,2,sdr,33,"));
}

#[test]
fn bad_scene_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.toml");
    fs::write(&scene, "wavelength = -0.1\n").unwrap();
    let out = bibc(&["summary", "--scene", p(&scene), "--out", p(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`wavelength`"), "{err}");
}

#[test]
fn bad_alpha_is_rejected() {
    let out = bibc(&["summary", "--alpha", "inf"]);
    assert!(!out.status.success());
}
