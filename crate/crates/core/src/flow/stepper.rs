//! Coupled time integration of the reference flow and the nudged observer.
//!
//! The pair is carried as `(u, w)` with `w = ũ - u` and advanced with a
//! second-order integrating-factor Runge–Kutta (Heun) scheme. The
//! mode-diagonal linear parts, `ν|k|²` for `u` and `ν̃|k|² + μ·1{|k|≤N}` for
//! `w`, are propagated exactly by `e^{-L h}`. The explicit parts are
//!
//! ```text
//! F_u(u)    = -B(u, u) + g
//! F_w(u, w) = -(ν̃ - ν) A u - B(u + w, u + w) + B(u, u)
//! ```
//!
//! and per step of size `h`, with `E = e^{-L h}`:
//!
//! ```text
//! a  = F(y_n)
//! y* = E (y_n + h a)
//! b  = F(y*)
//! y_{n+1} = E (y_n + h/2 a) + h/2 b
//! ```
//!
//! Since `F_w(u, 0) = 0` when `ν̃ = ν`, a synchronized pair stays
//! synchronized exactly.

use serde::{Deserialize, Serialize};

use super::forcing::make_forcing;
use super::params::SystemParams;
use crate::error::{Error, Result};
use crate::spectral::{bilinear, norm_hs, stokes_apply, GridSpec, SpectralField};

/// Relative slack when deciding whether a remaining interval is one step.
const STEP_SNAP: f64 = 1e-9;

/// Blow-up threshold on `‖·‖` in units of `R₁ = √2 ν G`.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub t: f64,
    /// Reference flow `u`.
    pub u: SpectralField,
    /// Observer `ũ`.
    pub u_tilde: SpectralField,
}

impl PairState {
    pub fn new(t: f64, u: SpectralField, u_tilde: SpectralField) -> Self {
        Self { t, u, u_tilde }
    }

    /// Sensitivity variable `w = ũ - u`.
    pub fn error(&self) -> SpectralField {
        &self.u_tilde - &self.u
    }
}

/// Receives the pair after every completed step.
pub trait DiagnosticsSink {
    fn on_step(&mut self, model: &FlowModel, state: &PairState) -> Result<()>;
}

/// Sink that discards everything.
pub struct NoDiagnostics;

impl DiagnosticsSink for NoDiagnostics {
    fn on_step(&mut self, _: &FlowModel, _: &PairState) -> Result<()> {
        Ok(())
    }
}

impl<F> DiagnosticsSink for F
where
    F: FnMut(&FlowModel, &PairState) -> Result<()>,
{
    fn on_step(&mut self, model: &FlowModel, state: &PairState) -> Result<()> {
        self(model, state)
    }
}

/// Outcome of [`FlowModel::spin_up`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinUpReport {
    pub t_spin: f64,
    /// `(t, ‖u(t)‖)` at the start and after every step.
    pub h1_samples: Vec<(f64, f64)>,
    /// `R₁ = √2 ν G`.
    pub r1: f64,
    /// Whether `‖u(t_spin)‖ <= R₁`.
    pub inside_ball: bool,
}

/// The pair system with its force and precomputed linear propagators.
#[derive(Debug, Clone)]
pub struct FlowModel {
    grid: GridSpec,
    params: SystemParams,
    forcing: SpectralField,
    r1: f64,
    ksq: Vec<f64>,
    observed: Vec<bool>,
    ref_decay: Vec<f64>,
    obs_decay: Vec<f64>,
}

impl FlowModel {
    pub fn new(grid: GridSpec, params: SystemParams) -> Result<Self> {
        let errs = params.validate(&grid);
        if !errs.is_empty() {
            return Err(Error::InvalidParameter(errs.join("; ")));
        }
        let forcing = make_forcing(&params.forcing, grid)?;
        let r1 = 2f64.sqrt() * norm_hs(&forcing, 0.0) / params.nu;
        let nsq = (params.n_obs * params.n_obs) as f64;
        let ksq: Vec<f64> = grid
            .modes()
            .map(|(_, k1, k2)| (k1 * k1 + k2 * k2) as f64)
            .collect();
        let observed = ksq.iter().map(|&q| q > 0.0 && q <= nsq).collect();
        let mut model = Self {
            grid,
            params,
            forcing,
            r1,
            ksq,
            observed,
            ref_decay: Vec::new(),
            obs_decay: Vec::new(),
        };
        model.ref_decay = model.reference_decay(model.params.dt);
        model.obs_decay = model.observer_decay(model.params.dt);
        Ok(model)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// `g = P_σ f`.
    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// `R₁ = √2 ν G` for the true viscosity.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// Changes the observer viscosity; takes effect from the next step.
    pub fn set_nu_tilde(&mut self, nu_tilde: f64) -> Result<()> {
        if !(nu_tilde.is_finite() && nu_tilde > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "observer viscosity must be > 0, got {nu_tilde}"
            )));
        }
        self.params.nu_tilde = nu_tilde;
        self.obs_decay = self.observer_decay(self.params.dt);
        Ok(())
    }

    /// Per-mode reference propagator `e^{-ν|k|² h}`.
    pub fn reference_decay(&self, h: f64) -> Vec<f64> {
        let nu = self.params.nu;
        self.ksq.iter().map(|&q| (-nu * q * h).exp()).collect()
    }

    /// Per-mode observer propagator `e^{-(ν̃|k|² + μ 1{|k|≤N}) h}`.
    pub fn observer_decay(&self, h: f64) -> Vec<f64> {
        let (nu_t, mu) = (self.params.nu_tilde, self.params.mu);
        self.ksq
            .iter()
            .zip(&self.observed)
            .map(|(&q, &obs)| {
                let rate = nu_t * q + if obs { mu } else { 0.0 };
                (-rate * h).exp()
            })
            .collect()
    }

    fn decays(&self, h: f64) -> (std::borrow::Cow<'_, [f64]>, std::borrow::Cow<'_, [f64]>) {
        use std::borrow::Cow;
        if h == self.params.dt {
            (Cow::Borrowed(&self.ref_decay), Cow::Borrowed(&self.obs_decay))
        } else {
            (
                Cow::Owned(self.reference_decay(h)),
                Cow::Owned(self.observer_decay(h)),
            )
        }
    }

    /// Returns `(B(u, u), -B(u, u) + g)`.
    fn reference_rhs(&self, u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let buu = bilinear(u, u)?;
        let r = &self.forcing - &buu;
        Ok((buu, r))
    }

    /// `-(ν̃ - ν) A u - B(u + w, u + w) + B(u, u)`.
    fn error_rhs(&self, u: &SpectralField, w: &SpectralField, buu: &SpectralField) -> Result<SpectralField> {
        let ut = u + w;
        let mut r = buu - &bilinear(&ut, &ut)?;
        let dnu = self.params.nu_tilde - self.params.nu;
        if dnu != 0.0 {
            r.axpy(-dnu, &stokes_apply(u, 2.0));
        }
        Ok(r)
    }

    fn advance_reference(&self, u: &SpectralField, h: f64, decay: &[f64]) -> Result<SpectralField> {
        let (_, a) = self.reference_rhs(u)?;
        let stage = propagate(decay, u, h, &a);
        let (_, b) = self.reference_rhs(&stage)?;
        let mut next = propagate(decay, u, 0.5 * h, &a);
        next.axpy(0.5 * h, &b);
        Ok(next)
    }

    /// One step of the coupled `(u, w)` system; returns `(u_{n+1}, ũ_{n+1})`.
    fn advance_pair(
        &self,
        u: &SpectralField,
        u_tilde: &SpectralField,
        h: f64,
        rd: &[f64],
        od: &[f64],
    ) -> Result<(SpectralField, SpectralField)> {
        let w = u_tilde - u;
        let (buu, a_u) = self.reference_rhs(u)?;
        let a_w = self.error_rhs(u, &w, &buu)?;
        let u_s = propagate(rd, u, h, &a_u);
        let w_s = propagate(od, &w, h, &a_w);
        let (buu_s, b_u) = self.reference_rhs(&u_s)?;
        let b_w = self.error_rhs(&u_s, &w_s, &buu_s)?;
        let mut u_next = propagate(rd, u, 0.5 * h, &a_u);
        u_next.axpy(0.5 * h, &b_u);
        let mut w_next = propagate(od, &w, 0.5 * h, &a_w);
        w_next.axpy(0.5 * h, &b_w);
        let ut_next = &u_next + &w_next;
        Ok((u_next, ut_next))
    }

    fn check_field(&self, v: &SpectralField, t: f64, which: &str) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::BlowUp {
                t,
                reason: format!("non-finite coefficient in {which}"),
            });
        }
        if self.r1 > 0.0 {
            let h1 = norm_hs(v, 1.0);
            if h1 > BLOWUP_FACTOR * self.r1 {
                return Err(Error::BlowUp {
                    t,
                    reason: format!(
                        "‖{which}‖ = {h1:e} exceeds {BLOWUP_FACTOR:e} × R₁ = {:e}",
                        BLOWUP_FACTOR * self.r1
                    ),
                });
            }
        }
        Ok(())
    }

    fn step_reference_h(&self, s: &PairState, h: f64) -> Result<PairState> {
        let (rd, _) = self.decays(h);
        let u = self.advance_reference(&s.u, h, &rd)?;
        let t = s.t + h;
        self.check_field(&u, t, "u")?;
        Ok(PairState::new(t, u, s.u_tilde.clone()))
    }

    fn step_nudged_h(&self, s: &PairState, h: f64) -> Result<PairState> {
        let (rd, od) = self.decays(h);
        let (_, ut) = self.advance_pair(&s.u, &s.u_tilde, h, &rd, &od)?;
        let t = s.t + h;
        self.check_field(&ut, t, "ũ")?;
        Ok(PairState::new(t, s.u.clone(), ut))
    }

    fn step_pair_h(&self, s: &PairState, h: f64) -> Result<PairState> {
        let (rd, od) = self.decays(h);
        let (u, ut) = self.advance_pair(&s.u, &s.u_tilde, h, &rd, &od)?;
        let t = s.t + h;
        self.check_field(&u, t, "u")?;
        self.check_field(&ut, t, "ũ")?;
        Ok(PairState::new(t, u, ut))
    }

    /// Advances `u` by one `dt`; `ũ` is returned untouched.
    pub fn step_reference(&self, s: &PairState) -> Result<PairState> {
        self.step_reference_h(s, self.params.dt)
    }

    /// Advances `ũ` by one `dt` against the co-evolved reference; `u` is
    /// returned untouched. The reference stages are recomputed internally,
    /// so this agrees with the observer half of [`step_pair`].
    ///
    /// [`step_pair`]: FlowModel::step_pair
    pub fn step_nudged(&self, s: &PairState) -> Result<PairState> {
        self.step_nudged_h(s, self.params.dt)
    }

    /// Advances both fields by one `dt`.
    pub fn step_pair(&self, s: &PairState) -> Result<PairState> {
        self.step_pair_h(s, self.params.dt)
    }

    /// Step size to take from `t` towards `t_end`, and whether the step
    /// lands on `t_end`. `None` once `t_end` is reached.
    fn next_step(&self, t: f64, t_end: f64) -> Option<(f64, bool)> {
        let dt = self.params.dt;
        let remaining = t_end - t;
        if remaining <= STEP_SNAP * dt {
            None
        } else if (remaining - dt).abs() <= STEP_SNAP * dt {
            Some((dt, true))
        } else if remaining < dt {
            Some((remaining, true))
        } else {
            Some((dt, false))
        }
    }

    /// Advances the pair to `t_end`, handing the state to `sink` after every
    /// step. The final step is shortened to land exactly on `t_end`.
    pub fn integrate_window(
        &self,
        state: PairState,
        t_end: f64,
        sink: &mut dyn DiagnosticsSink,
    ) -> Result<PairState> {
        if t_end < state.t - STEP_SNAP * self.params.dt {
            return Err(Error::InvalidParameter(format!(
                "t_end = {t_end} precedes the current time {}",
                state.t
            )));
        }
        let mut state = state;
        while let Some((h, lands)) = self.next_step(state.t, t_end) {
            state = self.step_pair_h(&state, h)?;
            if lands {
                state.t = t_end;
            }
            sink.on_step(self, &state)?;
        }
        Ok(state)
    }

    /// Integrates the reference alone from `u0` over `[0, t_spin]`.
    pub fn spin_up(&self, u0: &SpectralField, t_spin: f64) -> Result<(SpectralField, SpinUpReport)> {
        if !(t_spin.is_finite() && t_spin > 0.0) {
            return Err(Error::InvalidParameter(format!("t_spin must be > 0, got {t_spin}")));
        }
        let mut u = u0.clone();
        let mut t = 0.0;
        let mut samples = vec![(t, norm_hs(&u, 1.0))];
        while let Some((h, lands)) = self.next_step(t, t_spin) {
            let (rd, _) = self.decays(h);
            u = self.advance_reference(&u, h, &rd)?;
            t = if lands { t_spin } else { t + h };
            self.check_field(&u, t, "u")?;
            samples.push((t, norm_hs(&u, 1.0)));
        }
        let last = samples.last().map(|s| s.1).unwrap_or(0.0);
        let report = SpinUpReport {
            t_spin,
            r1: self.r1,
            inside_ball: last <= self.r1,
            h1_samples: samples,
        };
        Ok((u, report))
    }
}

/// `decay ⊙ (base + h · incr)`.
fn propagate(decay: &[f64], base: &SpectralField, h: f64, incr: &SpectralField) -> SpectralField {
    let mut out = base.clone();
    out.axpy(h, incr);
    {
        let (c1, c2) = out.components_mut();
        for ((a, b), &e) in c1.iter_mut().zip(c2.iter_mut()).zip(decay) {
            *a *= e;
            *b *= e;
        }
    }
    out
}
