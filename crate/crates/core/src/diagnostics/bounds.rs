//! Runtime checks of the a-priori and sensitivity bounds on recorded
//! trajectories.

use serde::{Deserialize, Serialize};

use super::force::{modified_grashof, ForceStats};
use super::record::DiagnosticsRecord;
use crate::flow::SystemParams;

/// Default relative slack on every bound.
pub const BOUND_REL_TOL: f64 = 1e-8;

/// Roundoff level of `w` relative to the reference, used as an absolute
/// floor for the sensitivity bounds.
const W_FLOOR_REL: f64 = 1e-12;

pub const BOUND_IDS: [&str; 8] = [
    "nse_H1_envelope",
    "ref_H1_ball",
    "ng_H1",
    "ng_H2",
    "ng_H3",
    "sens_L2",
    "sens_H1",
    "sens_H2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub id: String,
    pub t: f64,
    pub lhs: f64,
    #[serde(with = "crate::serde_float")]
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub id: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen.
    #[serde(with = "crate::serde_float")]
    pub worst_ratio: f64,
    #[serde(with = "crate::serde_float::option")]
    pub worst_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rel_tol: f64,
    pub bounds: Vec<BoundSummary>,
    pub total_violations: usize,
}

impl BoundReport {
    pub fn get(&self, id: &str) -> Option<&BoundSummary> {
        self.bounds.iter().find(|b| b.id == id)
    }
}

fn satisfied(lhs: f64, rhs: f64, floor: f64, rel_tol: f64) -> bool {
    lhs <= rhs * (1.0 + rel_tol) + floor
}

/// Evaluates every bound at every record. The sensitivity bounds restart
/// at the first record after each change of `ν̃`; the energy envelope
/// starts at the first record.
pub fn bound_evaluations(
    records: &[DiagnosticsRecord],
    stats: &ForceStats,
    p: &SystemParams,
    rel_tol: f64,
) -> Vec<BoundEvaluation> {
    let mut out = Vec::new();
    let Some(first) = records.first() else {
        return out;
    };
    let c = &p.constants;
    let (nu, mu, g) = (p.nu, p.mu, stats.grashof);
    let (s1, s2) = (stats.sigma(1), stats.sigma(2));
    let r1 = stats.radius(1);
    let (t0, h1_0) = (first.t, first.u_norms[1]);
    let mut tau = first;
    let mut eval = |id: &str, t: f64, lhs: f64, rhs: f64, floor: f64| {
        out.push(BoundEvaluation {
            id: id.into(),
            t,
            lhs,
            rhs,
            satisfied: satisfied(lhs, rhs, floor, rel_tol),
        });
    };
    for r in records {
        if r.nu_tilde != tau.nu_tilde {
            tau = r;
        }
        let t = r.t;
        let decay = (-nu * (t - t0)).exp();
        let env = decay * h1_0 * h1_0 + nu * nu * g * g * (1.0 - decay);
        eval("nse_H1_envelope", t, r.u_norms[1].powi(2), env, 0.0);
        eval("ref_H1_ball", t, r.u_norms[1], r1, 0.0);

        let gt = modified_grashof(g, nu, r.nu_tilde, mu);
        let ng1 = c.alpha_tilde(1).powi(2) * nu * nu * gt * gt;
        eval("ng_H1", t, r.u_tilde_norms[1].powi(2), ng1, 0.0);
        let ng2 = nu * c.alpha_tilde(2) * s1.sqrt() * (s1.sqrt() + g) * gt;
        eval("ng_H2", t, r.u_tilde_norms[2], ng2, 0.0);
        let ng3 = nu * c.alpha_tilde(3) * s2.cbrt() * (s2.cbrt() + g).powi(2) * gt;
        eval("ng_H3", t, r.u_tilde_norms[3], ng3, 0.0);

        let local = stats.with_nu_tilde(r.nu_tilde, c);
        let dnu = (r.nu_tilde - nu) / nu;
        let forced = |k: f64| if mu > 0.0 { nu * nu * (nu / mu) * dnu * dnu * k * k } else { f64::INFINITY };
        let fade = (-mu * (t - tau.t)).exp();
        let floor = |s: usize| 0.5 * (W_FLOOR_REL * r.u_norms[s]).powi(2);
        eval("sens_L2", t, r.e, fade * tau.e + forced(local.k0), floor(0));
        eval("sens_H1", t, r.z, fade * tau.z + forced(local.k1), floor(1));
        eval(
            "sens_H2",
            t,
            2.0 * r.p,
            fade * 2.0 * tau.p + forced(local.k2),
            2.0 * floor(2),
        );
    }
    out
}

pub fn summarize(evals: &[BoundEvaluation], rel_tol: f64) -> BoundReport {
    let bounds: Vec<BoundSummary> = BOUND_IDS
        .iter()
        .map(|id| {
            let mut s = BoundSummary {
                id: id.to_string(),
                samples: 0,
                violations: 0,
                worst_ratio: 0.0,
                worst_t: None,
            };
            for e in evals.iter().filter(|e| e.id == *id) {
                s.samples += 1;
                if !e.satisfied {
                    s.violations += 1;
                }
                let ratio = if e.rhs > 0.0 { e.lhs / e.rhs } else if e.lhs > 0.0 { f64::INFINITY } else { 0.0 };
                if s.worst_t.is_none() || ratio > s.worst_ratio {
                    s.worst_ratio = ratio;
                    s.worst_t = Some(e.t);
                }
            }
            s
        })
        .collect();
    BoundReport {
        rel_tol,
        total_violations: bounds.iter().map(|b| b.violations).sum(),
        bounds,
    }
}

/// Evaluates and summarizes every bound on a record stream.
pub fn bound_checks(records: &[DiagnosticsRecord], stats: &ForceStats, p: &SystemParams) -> BoundReport {
    summarize(&bound_evaluations(records, stats, p, BOUND_REL_TOL), BOUND_REL_TOL)
}

/// Samples `(t, ‖u(t)‖)` that violate
/// `‖u(t)‖² <= e^{-ν(t-t₀)}‖u(t₀)‖² + ν²G²(1 - e^{-ν(t-t₀)})`, with `t₀` the
/// first sample.
pub fn h1_envelope_violations(samples: &[(f64, f64)], nu: f64, grashof: f64, rel_tol: f64) -> Vec<(f64, f64, f64)> {
    let Some(&(t0, h0)) = samples.first() else {
        return Vec::new();
    };
    samples
        .iter()
        .filter_map(|&(t, h)| {
            let decay = (-nu * (t - t0)).exp();
            let rhs = decay * h0 * h0 + nu * nu * grashof * grashof * (1.0 - decay);
            (!satisfied(h * h, rhs, 0.0, rel_tol)).then_some((t, h * h, rhs))
        })
        .collect()
}
