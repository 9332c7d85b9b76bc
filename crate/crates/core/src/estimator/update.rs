//! The viscosity update and its guards.

use serde::{Deserialize, Serialize};

use super::config::EstimatorConfig;
use crate::error::{Error, Result};
use crate::spectral::{inner_hs, norm_hs, stokes_apply, SpectralField};

/// Below this value of `|⟨Aũ_N, w_N⟩| / (|Aũ_N| |w_N|)` the two fields are
/// treated as orthogonal.
pub const DEGENERATE_COSINE: f64 = 1e-14;

/// `⟨A ũ_N, w_N⟩`.
pub fn update_denominator(u_tilde_n: &SpectralField, w_n: &SpectralField) -> Result<f64> {
    inner_hs(&stokes_apply(u_tilde_n, 2.0), w_n, 0.0)
}

/// `ν_m + μ |w_N|² / ⟨A ũ_N, w_N⟩`.
///
/// Fails when the denominator vanishes or is negligible against
/// `|Aũ_N| |w_N|`.
pub fn compute_update(nu_m: f64, mu: f64, w_n: &SpectralField, u_tilde_n: &SpectralField) -> Result<f64> {
    let den = update_denominator(u_tilde_n, w_n)?;
    let scale = norm_hs(u_tilde_n, 2.0) * norm_hs(w_n, 0.0);
    if den == 0.0 || !den.is_finite() || den.abs() <= DEGENERATE_COSINE * scale {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(nu_m + mu * norm_hs(w_n, 0.0).powi(2) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    /// `|⟨A ũ_N, w_N⟩|`.
    pub value: f64,
    /// `ε ν_ref²`.
    pub threshold: f64,
    /// `value / ν_ref²`.
    pub margin: f64,
    pub passed: bool,
}

/// Compares `|⟨A ũ_N, w_N⟩|` with `ε ν_ref²`.
pub fn check_nondegeneracy(
    u_tilde_n: &SpectralField,
    w_n: &SpectralField,
    eps: f64,
    nu_ref: f64,
) -> Result<NondegeneracyReport> {
    let value = update_denominator(u_tilde_n, w_n)?.abs();
    let threshold = eps * nu_ref * nu_ref;
    Ok(NondegeneracyReport {
        value,
        threshold,
        margin: value / (nu_ref * nu_ref),
        passed: value > 0.0 && value >= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitReason {
    MinWait,
    ShortHistory,
    NoPlateau,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateDecision {
    UpdateNow,
    Wait(WaitReason),
}

/// Largest relative deviation of `E_N` over the trailing `window` from its
/// latest value, or `None` if `history` does not reach back that far.
pub fn plateau_deviation(history: &[(f64, f64)], window: f64) -> Option<f64> {
    let &(now, e_now) = history.last()?;
    let slack = 1e-9 * window;
    let start = now - window;
    if history[0].0 > start + slack {
        return None;
    }
    let first = history.partition_point(|&(t, _)| t < start - slack);
    let dev = history[first..]
        .iter()
        .map(|&(_, e)| (e - e_now).abs())
        .fold(0.0, f64::max);
    Some(if dev == 0.0 { 0.0 } else { dev / e_now.abs() })
}

/// Decides whether to update at `now`. The guards are checked in order:
/// minimum wait since the last attempt, history length, `E_N` plateau
/// over `plateau_window`, non-degeneracy.
pub fn select_update_time(
    history: &[(f64, f64)],
    cfg: &EstimatorConfig,
    mu: f64,
    now: f64,
    last_attempt: f64,
    nondegenerate: bool,
) -> UpdateDecision {
    let min_wait = cfg.min_wait(mu);
    if now - last_attempt < min_wait * (1.0 - 1e-9) {
        return UpdateDecision::Wait(WaitReason::MinWait);
    }
    match plateau_deviation(history, cfg.plateau_window(mu)) {
        None => UpdateDecision::Wait(WaitReason::ShortHistory),
        Some(dev) if dev.is_nan() || dev > cfg.plateau_tol => UpdateDecision::Wait(WaitReason::NoPlateau),
        Some(_) if !nondegenerate => UpdateDecision::Wait(WaitReason::Degenerate),
        Some(_) => UpdateDecision::UpdateNow,
    }
}
