use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plcp_cli::config::parse_config;
use plcp_cli::run::{config_from_artifact, run};
use plcp_core::io::read_realization;

fn plcp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plcp"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nmu = 3\nseed = 9\nobs_radius = 2\n").unwrap();
    let out = plcp(
        &[
            "sample",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "11",
            "--lambda-l=2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    let (real, meta) = read_realization(&text).unwrap();
    let get = |k: &str| meta.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    assert_eq!(get("seed"), Some("11"));
    assert_eq!(get("mu"), Some("3"));
    assert_eq!(get("lambda_l"), Some("2"));
    assert_eq!(real.obs_radius, 2.0);
    assert!(get("output_dir").is_none());
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = plcp(&["render", "--seed", "5", "--mu", "2"], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["render.svg", "render-tessellation.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let c = tempfile::tempdir().unwrap();
    plcp(&["render", "--seed", "6", "--mu", "2"], c.path());
    assert_ne!(
        fs::read(a.path().join("render.svg")).unwrap(),
        fs::read(c.path().join("render.svg")).unwrap()
    );
}

#[test]
fn replay_subcommand_reproduces_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(
        plcp(&["nn-cdf-palm", "--n", "300", "--mu", "2"], a.path())
            .status
            .code(),
        Some(0)
    );
    let artifact = a.path().join("nn-cdf-palm.json");
    let out = plcp(&["replay", artifact.to_str().unwrap()], b.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["nn-cdf-palm.csv", "nn-cdf-palm-analytic.csv", "nn-cdf-palm.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| plcp(args, dir.path()).status.code();
    assert_eq!(code(&["bogus"]), Some(1));
    assert_eq!(code(&["sample", "--no-such-key", "1"]), Some(1));
    assert_eq!(code(&["sample", "--mu", "-1"]), Some(1));
    assert_eq!(code(&["nn-cdf", "--orientation", "manhattan"]), Some(1));
    assert_eq!(code(&["sample", "--config", "/nonexistent/plcp.cfg"]), Some(1));
    // Far from the high-intensity limit the cell law is off.
    assert_eq!(
        code(&["typical-cell", "--mu", "1", "--n", "2000", "--sweep-n", "10"]),
        Some(2)
    );
    // Cells too large for the window and no retries allowed.
    assert_eq!(
        code(&["typical-cell", "--mu", "0.05", "--n", "200", "--max-retries", "0"]),
        Some(3)
    );
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = plcp(&["laplace", "--alpha", "two"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn every_artifact_carries_the_full_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse_config(&format!(
        "experiment=facets\nn=20\nseed=3\noutput_dir={}",
        dir.path().display()
    ))
    .unwrap();
    let outcome = run(&config).unwrap();
    for f in &outcome.files {
        let back = config_from_artifact(&fs::read_to_string(f).unwrap()).unwrap();
        assert_eq!(back.to_pairs(), config.to_pairs(), "{}", f.display());
    }
}

#[test]
fn manhattan_sampling_is_supported() {
    let dir = tempfile::tempdir().unwrap();
    let out = plcp(&["render", "--orientation", "manhattan", "--mu", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("render.svg")).unwrap();
    assert!(svg.contains("orientation=manhattan"));
}
