use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use planar_eikonal::output::{read_csv, CSV_COLUMNS};
use serde_json::Value;
use tempfile::TempDir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planar-eikonal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = cli(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("JSON error on stderr");
    v["kind"].as_str().unwrap().to_string()
}

/// Preset with a short q grid and few MC samples, for quick runs.
fn small_config(dir: &Path, extra: &str) -> String {
    let shown = cli(&["presets", "show", "fig_plane1"]);
    let text = String::from_utf8(shown.stdout)
        .unwrap()
        .replace("count = 401", "count = 41")
        .replace("mc_samples = 100000", "mc_samples = 2000");
    let path = dir.join("config.toml");
    fs::write(&path, format!("{text}{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &["--q-max", "20kev"]);
    let status: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(status["status"], "ok");
    for route in ["structure_factor", "linear", "born"] {
        let rows = read_csv(&dir.path().join(format!("spectrum_{route}.csv"))).unwrap();
        assert_eq!(rows.len(), 401);
        let last = rows.last().unwrap();
        assert!((last.column("q_keV").unwrap() - 20.0).abs() < 1e-12);
    }
    let sf = read_csv(&dir.path().join("spectrum_structure_factor.csv")).unwrap();
    for row in &sf {
        let (c, i, t) = (
            row.column("coherent").unwrap(),
            row.column("incoherent").unwrap(),
            row.column("total").unwrap(),
        );
        assert!(((c + i) - t).abs() <= 1e-15 * t);
        assert!(row.column("born_total").is_none());
    }
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.json")).unwrap())
            .unwrap();
    assert_eq!(meta["amplitude"], 10.0);
    assert_eq!(meta["n_planes"], 1);
    assert_eq!(meta["seed"], 12345);
    assert_eq!(meta["routes"].as_array().unwrap().len(), 3);
    assert!(meta["route_agreement"].is_null());
    assert!(meta["neglected_term_estimate"].as_f64().unwrap() > 0.0);
    assert!(meta["config"]["target"].is_object());
}

#[test]
fn header_matches_schema() {
    let dir = TempDir::new().unwrap();
    run_into(dir.path(), &["--route", "born"]);
    let text = fs::read_to_string(dir.path().join("spectrum_born.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert!(!dir.path().join("spectrum_linear.csv").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg_dir = TempDir::new().unwrap();
    let cfg = small_config(cfg_dir.path(), "");
    run_into(
        a.path(),
        &[
            "--config",
            &cfg,
            "--threads",
            "1",
            "--route",
            "direct_2d",
            "--route",
            "structure_factor",
        ],
    );
    run_into(
        b.path(),
        &[
            "--config",
            &cfg,
            "--threads",
            "3",
            "--route",
            "direct_2d",
            "--route",
            "structure_factor",
        ],
    );
    for name in ["spectrum_direct_2d.csv", "spectrum_structure_factor.csv"] {
        let (x, y) = (
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
        );
        assert!(x == y, "{name} differs");
    }
    // The sidecars differ only in the recorded output directory.
    let sidecar = |d: &Path| {
        let mut v: Value =
            serde_json::from_slice(&fs::read(d.join("spectrum.json")).unwrap()).unwrap();
        v["config"]["output"]["dir"] = Value::Null;
        v
    };
    assert_eq!(sidecar(a.path()), sidecar(b.path()));
    let meta: Value =
        serde_json::from_slice(&fs::read(a.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(meta["route_agreement"]["within_threshold"], true);
}

#[test]
fn unknown_route_is_a_config_error() {
    let out = cli(&["run", "--route", "fft"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "\n[extra]\nfoo = 1\n");
    let out = cli(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn bad_unit_is_rejected() {
    let out = cli(&["run", "--q-max", "3parsec"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn presets_listed_and_runnable() {
    let out = cli(&["presets", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig_plane1", "fig_planes3", "si100_n5_a10", "si100_n1_a1"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    let dir = TempDir::new().unwrap();
    run_into(
        dir.path(),
        &[
            "--preset",
            "si100_n3_a1",
            "--route",
            "structure_factor",
            "--q-max",
            "1.0",
        ],
    );
    let meta: Value =
        serde_json::from_slice(&fs::read(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(meta["n_planes"], 3);
    assert_eq!(meta["amplitude"], 1.0);
}

#[test]
fn check_csv_rejects_schema_violations() {
    let dir = TempDir::new().unwrap();
    run_into(dir.path(), &["--route", "born", "--q-max", "1.0"]);
    let good = dir.path().join("spectrum_born.csv");
    assert!(cli(&["check-csv", good.to_str().unwrap()]).status.success());

    let text = fs::read_to_string(&good).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(2, 3);
    let unordered = dir.path().join("unordered.csv");
    fs::write(&unordered, lines.join("\n")).unwrap();
    let out = cli(&["check-csv", unordered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "serialization");

    let renamed = dir.path().join("renamed.csv");
    fs::write(&renamed, text.replacen("total", "sum", 1)).unwrap();
    assert_eq!(
        cli(&["check-csv", renamed.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let nan = dir.path().join("nan.csv");
    let mut rows: Vec<String> = text.lines().map(str::to_string).collect();
    rows[5] = rows[5].replacen(",", ",NaN,", 1).replacen(",,", ",", 1);
    fs::write(&nan, rows.join("\n")).unwrap();
    assert_eq!(
        cli(&["check-csv", nan.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn validate_passes_on_default_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = cli(&["validate", "--config", &cfg]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(out.status.success(), "{report:#}");
    assert_eq!(report["passed"], true);
}

#[test]
fn validate_flags_coarse_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("[grid]\n", "[grid]\ndx = 0.25\n");
    fs::write(&cfg, text).unwrap();
    let out = cli(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"grid_resolves_q_max"), "{failed:?}");
    assert!(failed.contains(&"plancherel"), "{failed:?}");
}
