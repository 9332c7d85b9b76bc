//! TOML experiment configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::flow::{make_forcing, ForcingSpec, SystemParams, TheoremConstants};
use crate::spectral::{norm_hs, GridSpec};

/// Overrides `run.output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "NSE_NUDGE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Reference and observer with the viscosity estimator running.
    Twin,
    /// Fixed observer viscosity, no updates.
    SyncOnly,
    /// Spectral invariant suites only.
    Verify,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Twin => "twin",
            RunMode::SyncOnly => "sync_only",
            RunMode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub nu: f64,
    /// Observer viscosity for `sync_only`; defaults to `nu`. Twin runs start
    /// from `estimator.nu0` instead.
    #[serde(default)]
    pub nu_tilde: Option<f64>,
    pub mu: f64,
    pub n_obs: usize,
    pub dt: f64,
    /// Target Grashof number. When set, the forcing amplitude is rescaled
    /// so that `|g| / ν²` equals it.
    #[serde(default)]
    pub grashof: Option<f64>,
    #[serde(default)]
    pub constants: TheoremConstants,
}

/// Random initial condition of the reference flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_kmin")]
    pub kmin: f64,
    #[serde(default = "default_kmax")]
    pub kmax: f64,
    /// L² norm of the field.
    #[serde(default = "default_l2")]
    pub l2_norm: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kmin: default_kmin(),
            kmax: default_kmax(),
            l2_norm: default_l2(),
        }
    }
}

fn default_kmin() -> f64 {
    3.0
}

fn default_kmax() -> f64 {
    6.0
}

fn default_l2() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    /// Length of the reference-only spin-up; zero skips it.
    #[serde(default)]
    pub t_spin: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_stride() -> usize {
    10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub system: SystemConfig,
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub initial: InitialConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        let errs = cfg.validate();
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::ConfigValidation(errs))
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    /// Every violated invariant across all sections.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let grid = match GridSpec::new(self.grid.n) {
            Ok(g) => Some(g),
            Err(e) => {
                errs.push(format!("grid.n: {e}"));
                None
            }
        };
        if let Some(g) = &grid {
            errs.extend(self.system_params_unscaled().validate(g));
        }
        if let Some(gr) = self.system.grashof {
            if !(gr.is_finite() && gr > 0.0) {
                errs.push(format!("system.grashof: must be finite and > 0, got {gr}"));
            }
        }
        match (&self.estimator, self.run.mode) {
            (Some(e), _) => errs.extend(e.validate(self.system.dt)),
            (None, RunMode::Twin) => errs.push("estimator: required in twin mode".into()),
            (None, _) => {}
        }
        let i = &self.initial;
        if !(i.kmin.is_finite() && i.kmax.is_finite() && 0.0 < i.kmin && i.kmin <= i.kmax) {
            errs.push(format!("initial: need 0 < kmin <= kmax, got [{}, {}]", i.kmin, i.kmax));
        } else if let Some(g) = &grid {
            if i.kmin > g.dealias_cutoff() as f64 {
                errs.push(format!("initial.kmin: {} exceeds dealias cutoff {}", i.kmin, g.dealias_cutoff()));
            }
        }
        if !(i.l2_norm.is_finite() && i.l2_norm >= 0.0) {
            errs.push(format!("initial.l2_norm: must be finite and >= 0, got {}", i.l2_norm));
        }
        let r = &self.run;
        if !(r.t_spin.is_finite() && r.t_spin >= 0.0) {
            errs.push(format!("run.t_spin: must be finite and >= 0, got {}", r.t_spin));
        }
        if r.mode != RunMode::Verify && !(r.t_final.is_finite() && r.t_final > 0.0) {
            errs.push(format!("run.t_final: must be finite and > 0, got {}", r.t_final));
        }
        if r.record_stride == 0 {
            errs.push("run.record_stride: must be >= 1".into());
        }
        errs
    }

    fn system_params_unscaled(&self) -> SystemParams {
        let s = &self.system;
        SystemParams {
            nu: s.nu,
            nu_tilde: s.nu_tilde.unwrap_or(s.nu),
            mu: s.mu,
            n_obs: s.n_obs,
            dt: s.dt,
            forcing: self.forcing.clone(),
            constants: s.constants.clone(),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n)
    }

    /// System parameters with the forcing amplitude fixed by
    /// `system.grashof` when given. In twin mode `nu_tilde` is `estimator.nu0`.
    pub fn system_params(&self) -> Result<SystemParams> {
        let mut p = self.system_params_unscaled();
        if let (RunMode::Twin, Some(e)) = (self.run.mode, &self.estimator) {
            p.nu_tilde = e.nu0;
        }
        if let Some(target) = self.system.grashof {
            let unit = p.forcing.with_amplitude(1.0);
            let norm = norm_hs(&make_forcing(&unit, self.grid_spec()?)?, 0.0);
            if norm == 0.0 {
                return Err(Error::ZeroForce);
            }
            p.forcing = unit.with_amplitude(target * p.nu * p.nu / norm);
        }
        Ok(p)
    }

    /// Applies [`OUTPUT_DIR_ENV`] if set.
    pub fn apply_env_overrides(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                self.run.output_dir = PathBuf::from(dir);
            }
        }
    }
}

/// Reads and validates a config file. Parse errors carry the line and
/// column; validation errors list every violated invariant.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text, path)
}
