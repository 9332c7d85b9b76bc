use std::fs;
use std::path::Path;
use std::process::Command;

use nse_nudge::diagnostics::DiagnosticsRecord;
use nse_nudge::harness::{load_config, plot_data, read_summary, run_experiment, ExperimentConfig, RunMode};
use nse_nudge::Error;

const SMALL_TWIN: &str = r#"
[grid]
n = 32

[system]
nu = 0.1
mu = 20.0
n_obs = 8
dt = 0.01
grashof = 20.0

[forcing]
kind = "single_mode"
wavenumber = [0, 2]

[estimator]
nu0 = 0.2
max_updates = 3

[run]
mode = "twin"
t_spin = 20.0
t_final = 5.0
record_stride = 5
seed = 4
"#;

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml_str(text, Path::new("inline.toml")).unwrap();
    c.run.output_dir = out.to_path_buf();
    c
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nse-nudge"))
}

#[test]
fn twin_run_is_deterministic_and_complete() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = run_experiment(&config(SMALL_TWIN, a.path())).unwrap();
    let sb = run_experiment(&config(SMALL_TWIN, b.path())).unwrap();
    assert_eq!(sa.artifacts, sb.artifacts);
    for (name, file) in &sa.artifacts {
        assert!(sa.artifact_path(name).unwrap().exists(), "{name}");
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
    let est = sa.estimation.as_ref().unwrap();
    assert_eq!(est.accepted_updates, 3);
    assert!(est.betas.iter().all(|&b| b < 1.0));
    let errs: Vec<f64> = est.nu_sequence.iter().map(|v| (v - 0.1).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert_eq!(sa.bounds.as_ref().unwrap().total_violations, 0);
    assert_eq!(sa.algebra.as_ref().unwrap().total_violations, 0);
}

#[test]
fn summary_round_trips_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&config(SMALL_TWIN, dir.path())).unwrap();
    let path = s.artifact_path("summary").unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let back = read_summary(&path).unwrap();
    assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", text);

    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/summary.schema.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = value.as_object().unwrap();
    let props = schema["properties"].as_object().unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(obj.contains_key(key.as_str().unwrap()), "missing {key}");
    }
    for key in obj.keys() {
        assert!(props.contains_key(key), "{key} not in schema");
    }
    assert_eq!(obj["format"], schema["properties"]["format"]["const"]);
}

#[test]
fn plot_data_mirrors_sources() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&config(SMALL_TWIN, dir.path())).unwrap();
    let trace: nse_nudge::estimator::EstimationTrace =
        serde_json::from_str(&fs::read_to_string(s.artifact_path("trace").unwrap()).unwrap()).unwrap();
    let text = fs::read_to_string(s.artifact_path("plot_data").unwrap()).unwrap();
    let est_rows: Vec<&str> = text.lines().filter(|l| l.contains(",log10_nu_error,")).collect();
    assert_eq!(est_rows.len(), 3);
    for (row, u) in est_rows.iter().zip(trace.accepted()) {
        let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(v, u.error_after.log10());
    }
    let w_rows = text.lines().filter(|l| l.contains(",log10_w_l2,")).count();
    assert_eq!(w_rows, s.records);
    assert_eq!(plot_data(None, &[] as &[DiagnosticsRecord]).lines().count(), 2);
}

#[test]
fn sync_only_decays_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_TWIN.replace("mode = \"twin\"", "mode = \"sync_only\"");
    let s = run_experiment(&config(&text, dir.path())).unwrap();
    assert!(s.estimation.is_none());
    let sync = s.sync.unwrap();
    assert!(sync.monotone);
    assert!(sync.orders_of_decay > 10.0);
    assert!(sync.fitted_rate.unwrap() <= -20.0 / 4.0);
}

#[test]
fn verify_mode_passes_on_32() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_TWIN.replace("mode = \"twin\"", "mode = \"verify\"");
    let s = run_experiment(&config(&text, dir.path())).unwrap();
    assert_eq!(s.verify_passed, Some(true));
    assert!(s.artifact_path("verify_report").unwrap().exists());
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, SMALL_TWIN.replace("[grid]", "[grid]\nsize = 4")).unwrap();
    assert!(matches!(load_config(&path), Err(Error::ConfigParse { .. })));
    fs::write(&path, SMALL_TWIN.replace("nu0 = 0.2", "nu0 = -0.1").replace("dt = 0.01", "dt = 0.0")).unwrap();
    let Err(Error::ConfigValidation(errs)) = load_config(&path) else {
        panic!("expected validation errors");
    };
    assert!(errs.iter().any(|e| e.contains("estimator.nu0")));
    assert!(errs.iter().any(|e| e.contains("system.dt")));
    assert!(matches!(load_config(&dir.path().join("missing.toml")), Err(Error::Io { .. })));
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, SMALL_TWIN.replace("[run]", "[run]\nbogus = 1")).unwrap();
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let good = dir.path().join("verify.toml");
    fs::write(&good, SMALL_TWIN).unwrap();
    let out_dir = dir.path().join("from_env");
    let out = bin()
        .args(["verify", good.to_str().unwrap()])
        .env(nse_nudge::harness::OUTPUT_DIR_ENV, &out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("verify_report.json").exists());

    let out = bin().args(["stats", good.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((stats["force"]["grashof"].as_f64().unwrap() - 20.0).abs() < 1e-9);

    let blow = dir.path().join("blow.toml");
    let text = SMALL_TWIN
        .replace("dt = 0.01", "dt = 2.0")
        .replace("t_spin = 20.0", "t_spin = 0.0")
        .replace("t_final = 5.0", "t_final = 200.0")
        + "\n[initial]\nkmin = 1.0\nkmax = 10.0\nl2_norm = 50.0\n";
    fs::write(&blow, text).unwrap();
    let blow_out = dir.path().join("blow_out");
    let out = bin()
        .args(["run", blow.to_str().unwrap()])
        .env(nse_nudge::harness::OUTPUT_DIR_ENV, &blow_out)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // partial artifacts are flushed
    assert!(blow_out.join("diagnostics.csv").exists());
    assert!(blow_out.join("summary.json").exists());
}

#[test]
fn modes_parse() {
    for (s, m) in [("twin", RunMode::Twin), ("sync_only", RunMode::SyncOnly), ("verify", RunMode::Verify)] {
        assert_eq!(m.as_str(), s);
    }
}
