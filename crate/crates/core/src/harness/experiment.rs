//! Experiment orchestration and the artifacts written to the output
//! directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, RunMode};
use super::verify::{run_verify_suites, VerifyReport};
use crate::diagnostics::{
    algebra_checks, bound_checks, force_stats, h1_envelope_violations, verify_mu_conditions, write_timeseries,
    AlgebraReport, BoundReport, ConditionReport, DiagnosticsRecord, ForceStats, Recorder,
};
use crate::diagnostics::bounds::BOUND_REL_TOL;
use crate::error::{Error, Result};
use crate::estimator::{run_estimation_into, EstimationTrace};
use crate::flow::{Checkpoint, FlowModel, PairState, SpinUpReport, SystemParams};
use crate::spectral::SpectralField;

pub const SUMMARY_FORMAT: &str = "nse-nudge-summary 1";
pub const PLOT_VERSION_LINE: &str = "# nse-nudge plot data v1";

/// Random fields per verify suite.
pub const VERIFY_CASES: usize = 20;

/// Largest Sobolev index in the force statistics.
const STATS_K_MAX: u32 = 3;

/// `|Aw|` below this multiple of `|Au|` is roundoff.
pub const SYNC_FLOOR_REL: f64 = 1e-13;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const TRACE_FILE: &str = "trace.json";
pub const STATS_FILE: &str = "stats.json";
pub const BOUNDS_FILE: &str = "bounds.json";
pub const PLOT_FILE: &str = "plot_data.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const SPINUP_FILE: &str = "spinup.csv";
pub const VERIFY_FILE: &str = "verify_report.json";
pub const CONFIG_ECHO_FILE: &str = "config.resolved.toml";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinUpSummary {
    pub t_spin: f64,
    pub samples: usize,
    pub final_h1: f64,
    /// `√2 ν G`.
    pub r1: f64,
    pub inside_ball: bool,
    /// Samples breaking `‖u(t)‖² <= e^{-νt}‖u₀‖² + ν²G²(1 - e^{-νt})`.
    pub envelope_violations: usize,
}

/// Decay of `P = ½|Aw|²` along the recorded run, up to the roundoff floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncSummary {
    pub p_initial: f64,
    pub p_final: f64,
    pub p_min: f64,
    /// `log₁₀(P(0) / min P)`.
    pub orders_of_decay: f64,
    /// Time at which `P` first fell below `floor`, if it did.
    #[serde(with = "crate::serde_float::option")]
    pub t_floor: Option<f64>,
    pub floor: f64,
    /// Least-squares slope of `ln P` against `t` over the records above the floor.
    #[serde(with = "crate::serde_float::option")]
    pub fitted_rate: Option<f64>,
    /// Consecutive record pairs above the floor where `P` grew.
    pub non_monotone_windows: usize,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSummary {
    pub nu_true: f64,
    pub nu0: f64,
    pub final_nu: f64,
    pub final_abs_error: f64,
    pub final_rel_error: f64,
    pub attempts: usize,
    pub accepted_updates: usize,
    pub betas: Vec<f64>,
    /// `ν₀` followed by every accepted `ν_m`.
    pub nu_sequence: Vec<f64>,
    pub all_positive: bool,
    pub identity_checks: usize,
    pub identity_within_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub format: String,
    pub mode: RunMode,
    pub seed: u64,
    pub n: usize,
    pub params: SystemParams,
    pub t_spin: f64,
    pub t_final: f64,
    pub records: usize,
    pub spin_up: Option<SpinUpSummary>,
    pub sync: Option<SyncSummary>,
    pub estimation: Option<EstimationSummary>,
    pub conditions: Option<ConditionReport>,
    pub bounds: Option<BoundReport>,
    pub algebra: Option<AlgebraReport>,
    pub verify_passed: Option<bool>,
    /// Artifact names mapped to file names inside the output directory.
    pub artifacts: BTreeMap<String, String>,
    #[serde(skip)]
    pub wall_time_s: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunSummary {
    pub fn artifact_path(&self, name: &str) -> Option<PathBuf> {
        self.artifacts.get(name).map(|f| self.output_dir.join(f))
    }
}

/// Force statistics and the gain-condition report, as written to `stats.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub force: ForceStats,
    pub conditions: ConditionReport,
}

pub fn compute_stats(cfg: &ExperimentConfig) -> Result<StatsReport> {
    let grid = cfg.grid_spec()?;
    let p = cfg.system_params()?;
    let model = FlowModel::new(grid, p.clone())?;
    let force = force_stats(model.forcing(), &p, STATS_K_MAX)?;
    let conditions = verify_mu_conditions(&p, &force);
    Ok(StatsReport { force, conditions })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    write_json(summary, path)
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// Long-format `x,quantity,value` rows: `log10_nu_error` against the update
/// index for every accepted update, then `log10_w_l2` and `log10_w_h2`
/// against `t` for every record.
pub fn plot_data(trace: Option<&EstimationTrace>, records: &[DiagnosticsRecord]) -> String {
    let mut out = format!("{PLOT_VERSION_LINE}\nx,quantity,value\n");
    if let Some(tr) = trace {
        for (i, u) in tr.accepted().enumerate() {
            let _ = writeln!(out, "{},log10_nu_error,{}", i + 1, fmt_value(u.error_after.log10()));
        }
    }
    for r in records {
        let _ = writeln!(out, "{},log10_w_l2,{}", fmt_value(r.t), fmt_value(r.w_norms[0].log10()));
    }
    for r in records {
        let _ = writeln!(out, "{},log10_w_h2,{}", fmt_value(r.t), fmt_value(r.w_norms[2].log10()));
    }
    out
}

pub fn emit_plot_data(trace: Option<&EstimationTrace>, records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    fs::write(path, plot_data(trace, records)).map_err(|e| Error::io(path, e))
}

fn spinup_csv(report: &SpinUpReport) -> String {
    let mut out = String::from("t,u_h1\n");
    for &(t, h) in &report.h1_samples {
        let _ = writeln!(out, "{},{}", fmt_value(t), fmt_value(h));
    }
    out
}

/// Decay statistics of `P` over `records`.
pub fn sync_summary(records: &[DiagnosticsRecord]) -> Option<SyncSummary> {
    let first = records.first()?;
    let floor = 0.5 * (SYNC_FLOOR_REL * first.u_norms[2]).powi(2);
    let above: Vec<&DiagnosticsRecord> = records.iter().take_while(|r| r.p > floor).collect();
    let t_floor = records.get(above.len()).map(|r| r.t);
    let non_monotone = above.windows(2).filter(|w| w[1].p > w[0].p).count();
    let p_min = records.iter().map(|r| r.p).fold(f64::INFINITY, f64::min);
    let fitted_rate = if above.len() >= 2 {
        let n = above.len() as f64;
        let mt = above.iter().map(|r| r.t).sum::<f64>() / n;
        let ml = above.iter().map(|r| r.p.ln()).sum::<f64>() / n;
        let sxy: f64 = above.iter().map(|r| (r.t - mt) * (r.p.ln() - ml)).sum();
        let sxx: f64 = above.iter().map(|r| (r.t - mt).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    Some(SyncSummary {
        p_initial: first.p,
        p_final: records.last()?.p,
        p_min,
        orders_of_decay: (first.p / p_min).log10(),
        t_floor,
        floor,
        fitted_rate,
        non_monotone_windows: non_monotone,
        monotone: non_monotone == 0,
    })
}

fn estimation_summary(trace: &EstimationTrace) -> EstimationSummary {
    let mut nu_sequence = vec![trace.nu0];
    nu_sequence.extend(trace.accepted().map(|u| u.nu_after));
    let checks: Vec<_> = trace.accepted().filter_map(|u| u.identity).collect();
    EstimationSummary {
        nu_true: trace.nu_true,
        nu0: trace.nu0,
        final_nu: trace.final_nu,
        final_abs_error: trace.final_error(),
        final_rel_error: trace.final_relative_error(),
        attempts: trace.updates.len(),
        accepted_updates: trace.accepted_count(),
        betas: trace.betas(),
        all_positive: nu_sequence.iter().all(|&v| v > 0.0),
        nu_sequence,
        identity_checks: checks.len(),
        identity_within_bound: checks.iter().filter(|c| c.within_bound).count(),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Reference initial condition drawn from the configured seed.
pub fn initial_condition(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let grid = cfg.grid_spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let i = &cfg.initial;
    Ok(SpectralField::random_solenoidal(grid, &mut rng, i.kmin, i.kmax, i.l2_norm))
}

struct Artifacts<'a> {
    dir: &'a Path,
    names: BTreeMap<String, String>,
}

impl Artifacts<'_> {
    fn path(&mut self, name: &str, file: &str) -> PathBuf {
        self.names.insert(name.into(), file.into());
        self.dir.join(file)
    }
}

/// Runs the configured experiment and writes every artifact into
/// `cfg.run.output_dir`. A blow-up still flushes the records and the trace
/// gathered so far before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::ConfigValidation(errs));
    }
    let clock = Instant::now();
    let dir = cfg.run.output_dir.clone();
    create_dir(&dir)?;
    let mut art = Artifacts {
        dir: &dir,
        names: BTreeMap::new(),
    };
    let summary_path = art.path("summary", SUMMARY_FILE);
    let mut echo = cfg.clone();
    echo.run.output_dir = PathBuf::from(".");
    let echo_path = art.path("config", CONFIG_ECHO_FILE);
    fs::write(&echo_path, echo.to_toml_string()).map_err(|e| Error::io(&echo_path, e))?;

    let grid = cfg.grid_spec()?;
    let params = cfg.system_params()?;
    let mut summary = RunSummary {
        format: SUMMARY_FORMAT.into(),
        mode: cfg.run.mode,
        seed: cfg.run.seed,
        n: grid.n(),
        params: params.clone(),
        t_spin: cfg.run.t_spin,
        t_final: cfg.run.t_final,
        records: 0,
        spin_up: None,
        sync: None,
        estimation: None,
        conditions: None,
        bounds: None,
        algebra: None,
        verify_passed: None,
        artifacts: BTreeMap::new(),
        wall_time_s: 0.0,
        output_dir: dir.clone(),
    };

    if cfg.run.mode == RunMode::Verify {
        let report: VerifyReport = run_verify_suites(grid, cfg.run.seed, VERIFY_CASES)?;
        write_json(&report, &art.path("verify_report", VERIFY_FILE))?;
        summary.verify_passed = Some(report.passed);
        summary.artifacts = art.names;
        write_summary(&summary, &summary_path)?;
        summary.wall_time_s = clock.elapsed().as_secs_f64();
        return Ok(summary);
    }

    let mut model = FlowModel::new(grid, params.clone())?;
    let stats = force_stats(model.forcing(), &params, STATS_K_MAX)?;
    let conditions = verify_mu_conditions(&params, &stats);
    write_json(
        &StatsReport {
            force: stats.clone(),
            conditions: conditions.clone(),
        },
        &art.path("stats", STATS_FILE),
    )?;
    summary.conditions = Some(conditions);

    let u0 = initial_condition(cfg)?;
    let u = if cfg.run.t_spin > 0.0 {
        let (u, report) = model.spin_up(&u0, cfg.run.t_spin)?;
        let path = art.path("spinup", SPINUP_FILE);
        fs::write(&path, spinup_csv(&report)).map_err(|e| Error::io(&path, e))?;
        let viol = h1_envelope_violations(&report.h1_samples, params.nu, stats.grashof, BOUND_REL_TOL);
        summary.spin_up = Some(SpinUpSummary {
            t_spin: report.t_spin,
            samples: report.h1_samples.len(),
            final_h1: report.h1_samples.last().map(|s| s.1).unwrap_or(0.0),
            r1: report.r1,
            inside_ball: report.inside_ball,
            envelope_violations: viol.len(),
        });
        u
    } else {
        u0
    };

    let pair0 = PairState::new(0.0, u, SpectralField::zeros(grid));
    let mut recorder = Recorder::new(cfg.run.record_stride, stats.clone());
    recorder.record(&model, &pair0)?;
    let mut trace = None;
    let outcome = match cfg.run.mode {
        RunMode::Twin => {
            let est = cfg.estimator.as_ref().expect("validated");
            let mut tr = EstimationTrace::new(est, params.nu, params.mu, params.n_obs, pair0.t);
            let r = run_estimation_into(&mut model, pair0, est, cfg.run.t_final, &mut recorder, &mut tr);
            trace = Some(tr);
            r
        }
        RunMode::SyncOnly => model.integrate_window(pair0, cfg.run.t_final, &mut recorder),
        RunMode::Verify => unreachable!(),
    };

    let records = recorder.finish();
    summary.records = records.len();
    write_timeseries(&records, &art.path("diagnostics", DIAGNOSTICS_FILE))?;
    if let Some(tr) = &trace {
        tr.write_json(&art.path("trace", TRACE_FILE))?;
    }
    let state = match outcome {
        Ok(s) => s,
        Err(e) => {
            summary.artifacts = art.names;
            write_summary(&summary, &summary_path)?;
            return Err(e);
        }
    };

    Checkpoint::capture(model.params(), &state).save(&art.path("checkpoint", CHECKPOINT_FILE))?;
    emit_plot_data(trace.as_ref(), &records, &art.path("plot_data", PLOT_FILE))?;
    let bounds = bound_checks(&records, &stats, &params);
    write_json(&bounds, &art.path("bounds", BOUNDS_FILE))?;
    summary.bounds = Some(bounds);
    summary.algebra = Some(algebra_checks(&records, &stats));
    if cfg.run.mode == RunMode::SyncOnly {
        summary.sync = sync_summary(&records);
    }
    summary.estimation = trace.as_ref().map(estimation_summary);
    summary.artifacts = art.names;
    write_summary(&summary, &summary_path)?;
    summary.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(summary)
}
