use std::path::{Path, PathBuf};
use std::process::Command;

use collapse_cli::{load_config, run, ExperimentKind};
use serde_json::Value;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SG: &str = r#"{
  "kind": "stern_gerlach",
  "seed": 11,
  "params": {"u_mean": 5.0, "d_mean": 2.0, "t_grid": [0.0, 0.3, 1.0, 4.0], "samples": 4000}
}"#;

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sg.json", SG);
    let config = load_config(&cfg, None).unwrap();
    let a = run(&config, &dir.path().join("a")).unwrap();
    let b = run(&config, &dir.path().join("b")).unwrap();
    assert_eq!(
        std::fs::read(&a.results).unwrap(),
        std::fs::read(&b.results).unwrap()
    );
}

#[test]
fn probabilities_are_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sg.json", SG);
    let out = run(&load_config(&cfg, None).unwrap(), dir.path()).unwrap();
    let (header, rows) = rows(&out.results);
    assert_eq!(
        header.join(","),
        "u_mean,d_mean,t,samples,mc_mean,mc_stderr,analytic_paper,analytic_exact"
    );
    assert_eq!(rows.len(), 4);
    for name in ["mc_mean", "analytic_paper", "analytic_exact"] {
        for p in column(&header, &rows, name) {
            assert!((0.0..=1.0).contains(&p), "{name} = {p}");
        }
    }
    assert!(column(&header, &rows, "mc_stderr")
        .iter()
        .all(|&s| s >= 0.0));
    assert_eq!(column(&header, &rows, "mc_mean")[0], 1.0);
}

#[test]
fn manifest_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sg.json", SG);
    let config = load_config(&cfg, None).unwrap();
    let out = run(&config, dir.path()).unwrap();
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&out.manifest).unwrap()).unwrap();
    assert_eq!(manifest["kind"], "stern_gerlach");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["results"], "stern_gerlach.csv");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["columns"].as_array().unwrap().len(), 8);
    let echoed = collapse_cli::parse_config(&manifest["config"].to_string()).unwrap();
    assert_eq!(echoed, config);
}

#[test]
fn spectrum_file_is_resolved_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    write(
        &dir.path().join("cfg"),
        "spec.json",
        r#"{"u_energies": [1.0, 3.0], "d_energies": [0.0, 0.0], "weights": [0.5, 0.5]}"#,
    );
    let cfg = write(
        &dir.path().join("cfg"),
        "env.json",
        r#"{"params": {"t_grid": [0.0, 1.5707963267948966], "samples": 2000, "spectrum": "spec.json"}}"#,
    );
    let config = load_config(&cfg, Some(ExperimentKind::Environment)).unwrap();
    let out = run(&config, &dir.path().join("out")).unwrap();
    let (header, rows) = rows(&out.results);
    assert_eq!(
        header.join(","),
        "K,t,exact_prob,mc_prob,abs_deviation,coherence"
    );
    assert_eq!(rows[0][0], "2");
    let exact = column(&header, &rows, "exact_prob");
    assert!((exact[0] - 1.0).abs() < 1e-15);
    // Splittings 1 and 3 at t = π/2.
    let t = std::f64::consts::FRAC_PI_2;
    let expected = 0.5 * (0.5 + 0.5 * t.cos()) + 0.5 * (0.5 + 0.5 * (3.0 * t).cos());
    assert!((exact[1] - expected).abs() < 1e-12);
    let mc = column(&header, &rows, "mc_prob");
    assert!((mc[1] - exact[1]).abs() < 0.05);
}

#[test]
fn visibility_maps_phase_onto_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "vis.json",
        r#"{"kind": "visibility", "hbar": 2.0, "params": {"u_mean": 3.0, "d_mean": 1.0, "a_grid": [1.0, 3.141592653589793], "samples": 500}}"#,
    );
    let out = run(&load_config(&cfg, None).unwrap(), dir.path()).unwrap();
    let (header, rows) = rows(&out.results);
    let t = column(&header, &rows, "t");
    assert!((t[0] - 0.5).abs() < 1e-15);
    let paper = column(&header, &rows, "mean_cos_paper");
    assert!((paper[0] - 1f64.sin()).abs() < 1e-12);
    assert!(paper[1].abs() < 1e-12);
}

#[test]
fn scaling_writes_one_row_per_size_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sc.json",
        r#"{"kind": "scaling", "params": {"n_min": 3, "n_max": 5, "backends": ["SparseStep", "DenseExpm"], "product_sizes": [4, 8], "repeats": 1}}"#,
    );
    let out = run(&load_config(&cfg, None).unwrap(), dir.path()).unwrap();
    let (header, rows) = rows(&out.results);
    assert_eq!(
        header.join(","),
        "n_spins,dim,param_count,backend,matvec_count,wall_time_s,peak_state_bytes"
    );
    assert_eq!(rows.len(), 8);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&out.manifest).unwrap()).unwrap();
    assert_eq!(manifest["fits"].as_array().unwrap().len(), 3);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collapse-sim"))
}

#[test]
fn binary_succeeds_and_seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sg.json", SG);
    let status = |out: &str, seed: Option<&str>| {
        let mut cmd = binary();
        cmd.arg("stern-gerlach")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out));
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        cmd.env("COLLAPSE_SIM_THREADS", "2").output().unwrap()
    };
    assert!(status("a", None).status.success());
    assert!(status("b", Some("12")).status.success());
    let a = std::fs::read(dir.path().join("a/stern_gerlach.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/stern_gerlach.csv")).unwrap();
    assert_ne!(a, b);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 12);
}

#[test]
fn binary_reports_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"params": {"u_mean": 1.0, "d_mean": 1.0, "t_grid": [0, 1, 1], "samples": 0}}"#,
    );
    let out = binary()
        .args(["stern-gerlach", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("params.samples"), "{stderr}");
    assert!(stderr.contains("params.t_grid"), "{stderr}");
    assert!(!dir.path().join("o/stern_gerlach.csv").exists());
}

#[test]
fn binary_rejects_mismatched_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sg.json", SG);
    let out = binary()
        .args(["environment", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (file, kind) in [
        ("stern_gerlach.json", ExperimentKind::SternGerlach),
        ("visibility.json", ExperimentKind::VisibilityCurve),
        ("environment.json", ExperimentKind::Environment),
        ("environment_explicit.json", ExperimentKind::Environment),
        ("scaling.json", ExperimentKind::Scaling),
    ] {
        let config = load_config(&root.join(file), Some(kind)).unwrap();
        assert_eq!(config.kind, kind);
    }
}
