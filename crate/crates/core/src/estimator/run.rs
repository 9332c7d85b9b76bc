//! The outer estimation loop and its trace.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::EstimatorConfig;
use super::update::{check_nondegeneracy, compute_update, select_update_time, UpdateDecision, WaitReason};
use crate::diagnostics::{
    backward_derivative, centered_derivative, compute_j, edot_identity, energy_functionals,
    update_error_decomposition, UpdateDecomposition,
};
use crate::error::{Error, Result};
use crate::flow::{DiagnosticsSink, FlowModel, PairState};
use crate::spectral::{lowpass, norm_hs};

/// Reconstructed viscosity error must agree with the known one within this
/// multiple of the local balance residual.
pub const IDENTITY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// `|⟨Aũ_N, w_N⟩| < ε ν̃²`.
    Degenerate,
    /// The proposed viscosity was not positive.
    NonPositive,
}

/// `ν_m - ν` recovered from the balance identity with a finite-difference
/// `Ė_N`, against the known value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub edot_identity: f64,
    /// One-sided difference of `E_N` at the update time.
    pub edot_fd: f64,
    pub reconstructed_delta_nu: f64,
    pub known_delta_nu: f64,
    pub error: f64,
    /// Largest centered balance residual over the preceding steps, divided
    /// by `|⟨Aũ_N, w_N⟩|`.
    pub residual_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    /// Index of the viscosity in force before this attempt.
    pub m: usize,
    pub t: f64,
    pub nu_before: f64,
    pub nu_after: f64,
    #[serde(with = "crate::serde_float::option")]
    pub proposed: Option<f64>,
    /// `⟨A ũ_N, w_N⟩` at the left limit.
    pub denominator: f64,
    pub e_n: f64,
    /// `|denominator| / ν̃²`.
    pub margin: f64,
    /// `|denominator| / ν²` with the true viscosity.
    pub margin_true: f64,
    pub accepted: bool,
    pub skip_reason: Option<SkipReason>,
    pub error_before: f64,
    pub error_after: f64,
    /// `|ν_{m+1} - ν| / |ν_m - ν|` for accepted updates.
    #[serde(with = "crate::serde_float::option")]
    pub beta: Option<f64>,
    pub decomposition: UpdateDecomposition,
    #[serde(default)]
    pub identity: Option<IdentityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTrace {
    pub nu_true: f64,
    pub mu: f64,
    pub n_obs: usize,
    pub nu0: f64,
    pub epsilon: f64,
    #[serde(with = "crate::serde_float")]
    pub min_wait: f64,
    #[serde(with = "crate::serde_float")]
    pub plateau_window: f64,
    pub plateau_tol: f64,
    pub max_updates: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub updates: Vec<UpdateRecord>,
    pub final_nu: f64,
}

impl EstimationTrace {
    pub fn new(cfg: &EstimatorConfig, nu_true: f64, mu: f64, n_obs: usize, t_start: f64) -> Self {
        Self {
            nu_true,
            mu,
            n_obs,
            nu0: cfg.nu0,
            epsilon: cfg.epsilon,
            min_wait: cfg.min_wait(mu),
            plateau_window: cfg.plateau_window(mu),
            plateau_tol: cfg.plateau_tol,
            max_updates: cfg.max_updates,
            t_start,
            t_end: t_start,
            updates: Vec::new(),
            final_nu: cfg.nu0,
        }
    }

    pub fn accepted(&self) -> impl Iterator<Item = &UpdateRecord> {
        self.updates.iter().filter(|u| u.accepted)
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    /// Realized contraction ratios of the accepted updates.
    pub fn betas(&self) -> Vec<f64> {
        self.accepted().filter_map(|u| u.beta).collect()
    }

    pub fn final_error(&self) -> f64 {
        (self.final_nu - self.nu_true).abs()
    }

    pub fn final_relative_error(&self) -> f64 {
        self.final_error() / self.nu_true
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// States kept for the finite-difference check at an update.
const BUFFER_LEN: usize = 4;

fn identity_check(
    model: &FlowModel,
    buffer: &VecDeque<(PairState, f64)>,
    j_now: (f64, f64, f64, f64),
    e_now: (f64, f64),
) -> Result<Option<IdentityCheck>> {
    let n = buffer.len();
    if n < 3 {
        return Ok(None);
    }
    let p = model.params();
    let (mu, nu, dnu) = (p.mu, p.nu, p.nu_tilde - p.nu);
    let (j1, transfer, coupling, den) = j_now;
    let (e_n, z_n) = e_now;
    let ts = |i: usize| buffer[i].0.t;
    let es = |i: usize| buffer[i].1;
    let edot_fd = backward_derivative(
        [ts(n - 3), ts(n - 2), ts(n - 1)],
        [es(n - 3), es(n - 2), es(n - 1)],
    );
    let edot_id = edot_identity(j1, e_n, z_n, mu, nu);
    let reconstructed = (-edot_fd - 2.0 * nu * z_n + transfer - coupling - 2.0 * mu * e_n) / den;
    let mut residual = 0.0f64;
    for i in (1..n - 1).rev().take(2) {
        let s = &buffer[i].0;
        let w = s.error();
        let f = energy_functionals(&w, p.n_obs)?;
        let j = compute_j(&s.u, &s.u_tilde, &w, p.n_obs, dnu)?;
        let id = edot_identity(j.j1, f.e_n, f.z_n, mu, nu);
        let fd = centered_derivative([ts(i - 1), ts(i), ts(i + 1)], [es(i - 1), es(i), es(i + 1)]);
        residual = residual.max((id - fd).abs());
    }
    let bound = residual / den.abs();
    let error = (reconstructed - dnu).abs();
    Ok(Some(IdentityCheck {
        edot_identity: edot_id,
        edot_fd,
        reconstructed_delta_nu: reconstructed,
        known_delta_nu: dnu,
        error,
        residual_bound: bound,
        within_bound: error <= IDENTITY_FACTOR * bound,
    }))
}

/// Runs the estimator from `pair0` to `t_final`, appending to `trace`. The
/// observer viscosity of `model` is set to `cfg.nu0` first; the pair is
/// handed to `sink` after every step, before any update at that instant.
pub fn run_estimation_into(
    model: &mut FlowModel,
    pair0: PairState,
    cfg: &EstimatorConfig,
    t_final: f64,
    sink: &mut dyn DiagnosticsSink,
    trace: &mut EstimationTrace,
) -> Result<PairState> {
    let errs = cfg.validate(model.params().dt);
    if !errs.is_empty() {
        return Err(Error::InvalidParameter(errs.join("; ")));
    }
    model.set_nu_tilde(cfg.nu0)?;
    let n_obs = model.params().n_obs;
    let mu = model.params().mu;
    let nu = model.params().nu;
    let dt = model.params().dt;

    let e_n_of = |s: &PairState| -> Result<f64> { Ok(0.5 * norm_hs(&lowpass(&s.error(), n_obs)?, 0.0).powi(2)) };
    let mut state = pair0;
    let mut history = vec![(state.t, e_n_of(&state)?)];
    let mut buffer: VecDeque<(PairState, f64)> = VecDeque::from([(state.clone(), history[0].1)]);
    let mut last_attempt = state.t;
    let mut m = 0usize;
    trace.final_nu = cfg.nu0;

    while t_final - state.t > 1e-9 * dt {
        let t_next = (state.t + dt).min(t_final);
        state = model.integrate_window(state, t_next, sink)?;
        trace.t_end = state.t;
        let e_n = e_n_of(&state)?;
        history.push((state.t, e_n));
        buffer.push_back((state.clone(), e_n));
        if buffer.len() > BUFFER_LEN {
            buffer.pop_front();
        }
        if trace.accepted_count() >= cfg.max_updates {
            continue;
        }
        if select_update_time(&history, cfg, mu, state.t, last_attempt, true) != UpdateDecision::UpdateNow {
            continue;
        }

        let nu_m = model.params().nu_tilde;
        let w = state.error();
        let w_n = lowpass(&w, n_obs)?;
        let ut_n = lowpass(&state.u_tilde, n_obs)?;
        let nd = check_nondegeneracy(&ut_n, &w_n, cfg.epsilon, nu_m)?;
        let decision = select_update_time(&history, cfg, mu, state.t, last_attempt, nd.passed);
        last_attempt = state.t;

        let f = energy_functionals(&w, n_obs)?;
        let j = compute_j(&state.u, &state.u_tilde, &w, n_obs, nu_m - nu)?;
        let decomposition = update_error_decomposition(&state.u, &state.u_tilde, &w, n_obs, mu, nu, nu_m)?;
        let identity = identity_check(
            model,
            &buffer,
            (j.j1, j.transfer, j.coupling, j.denominator),
            (f.e_n, f.z_n),
        )?;

        let (proposed, skip) = if decision == UpdateDecision::Wait(WaitReason::Degenerate) {
            (None, Some(SkipReason::Degenerate))
        } else {
            match compute_update(nu_m, mu, &w_n, &ut_n) {
                Ok(v) if v.is_finite() && v > 0.0 => (Some(v), None),
                Ok(v) => (Some(v), Some(SkipReason::NonPositive)),
                Err(Error::DegenerateDenominator { .. }) => (None, Some(SkipReason::Degenerate)),
                Err(e) => return Err(e),
            }
        };
        let accepted = skip.is_none();
        let nu_after = if accepted { proposed.unwrap_or(nu_m) } else { nu_m };
        let (err_before, err_after) = ((nu_m - nu).abs(), (nu_after - nu).abs());
        trace.updates.push(UpdateRecord {
            m,
            t: state.t,
            nu_before: nu_m,
            nu_after,
            proposed,
            denominator: j.denominator,
            e_n: f.e_n,
            margin: nd.margin,
            margin_true: nd.value / (nu * nu),
            accepted,
            skip_reason: skip,
            error_before: err_before,
            error_after: err_after,
            beta: (accepted && err_before > 0.0).then(|| err_after / err_before),
            decomposition,
            identity,
        });
        if accepted {
            model.set_nu_tilde(nu_after)?;
            trace.final_nu = nu_after;
            m += 1;
            history.clear();
            history.push((state.t, e_n));
            buffer.clear();
            buffer.push_back((state.clone(), e_n));
        }
    }
    Ok(state)
}

/// Runs the estimator and returns the final pair and the trace.
pub fn run_estimation(
    model: &mut FlowModel,
    pair0: PairState,
    cfg: &EstimatorConfig,
    t_final: f64,
    sink: &mut dyn DiagnosticsSink,
) -> Result<(PairState, EstimationTrace)> {
    let p = model.params();
    let mut trace = EstimationTrace::new(cfg, p.nu, p.mu, p.n_obs, pair0.t);
    let state = run_estimation_into(model, pair0, cfg, t_final, sink, &mut trace)?;
    Ok((state, trace))
}
