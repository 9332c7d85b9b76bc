//! Force statistics and the gain conditions built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{SystemParams, TheoremConstants};
use crate::spectral::{norm_hs, SpectralField};

/// Grashof numbers, shape factors, absorbing-ball radii and sensitivity
/// constants. Map keys are the decimal index (`"1"`, `"2"`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceStats {
    pub g_norm: f64,
    pub nu: f64,
    pub nu_tilde: f64,
    pub mu: f64,
    /// `G = |g| / ν²`.
    pub grashof: f64,
    /// `G̃ = ((ν/ν̃)(ν/μ) + 1)^{1/2} G`; infinite when `μ = 0`.
    #[serde(with = "crate::serde_float")]
    pub grashof_tilde: f64,
    /// `σ_ℓ = |A^{ℓ/2} g| / |g|` for `ℓ = 0..=k_max`.
    pub sigma: BTreeMap<String, f64>,
    /// `R₁ = √2 ν G`, `R_k = c_k ν (σ_{k-1}^{1/k} + G)^{k-1} G`.
    pub radius: BTreeMap<String, f64>,
    #[serde(with = "crate::serde_float")]
    pub k0: f64,
    #[serde(with = "crate::serde_float")]
    pub k1: f64,
    #[serde(with = "crate::serde_float")]
    pub k2: f64,
}

impl ForceStats {
    pub fn sigma(&self, l: u32) -> f64 {
        self.sigma[&l.to_string()]
    }

    pub fn radius(&self, k: u32) -> f64 {
        self.radius[&k.to_string()]
    }

    /// Recomputes the `ν̃`-dependent entries for a new observer viscosity.
    pub fn with_nu_tilde(&self, nu_tilde: f64, constants: &TheoremConstants) -> Self {
        let mut out = self.clone();
        out.nu_tilde = nu_tilde;
        out.fill_dependent(constants);
        out
    }

    fn fill_dependent(&mut self, c: &TheoremConstants) {
        let (nu, nt, mu, g) = (self.nu, self.nu_tilde, self.mu, self.grashof);
        self.grashof_tilde = modified_grashof(g, nu, nt, mu);
        let gt = self.grashof_tilde;
        let (s1, s2) = (self.sigma(1), self.sigma(2));
        let (at1, at2) = (c.alpha_tilde(1), c.alpha_tilde(2));
        self.k0 = (c.get("C") * at1 * at1 * gt * gt).sqrt();
        self.k1 = (c.get("C") * at2 * at2 * (s1.sqrt() + gt).powi(2) * gt * gt).sqrt();
        self.k2 = (c.get("c3") * at2 * at2 * s2.powf(2.0 / 3.0) * (s2.cbrt() + g).powi(4) * gt * gt).sqrt();
    }
}

pub fn modified_grashof(g: f64, nu: f64, nu_tilde: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        f64::INFINITY
    } else {
        ((nu / nu_tilde) * (nu / mu) + 1.0).sqrt() * g
    }
}

/// Statistics of `g` for the parameters in `p`, with radii up to `k_max`.
pub fn force_stats(g: &SpectralField, p: &SystemParams, k_max: u32) -> Result<ForceStats> {
    let g_norm = norm_hs(g, 0.0);
    if g_norm == 0.0 {
        return Err(Error::ZeroForce);
    }
    let k_max = k_max.max(2);
    let nu = p.nu;
    let grashof = g_norm / (nu * nu);
    let sigma: BTreeMap<String, f64> = (0..=k_max)
        .map(|l| (l.to_string(), norm_hs(g, l as f64) / g_norm))
        .collect();
    let mut radius = BTreeMap::new();
    radius.insert("1".to_string(), 2f64.sqrt() * nu * grashof);
    for k in 2..=k_max {
        let s = sigma[&(k - 1).to_string()].powf(1.0 / k as f64);
        let r = p.constants.radius(k) * nu * (s + grashof).powi(k as i32 - 1) * grashof;
        radius.insert(k.to_string(), r);
    }
    let mut stats = ForceStats {
        g_norm,
        nu,
        nu_tilde: p.nu_tilde,
        mu: p.mu,
        grashof,
        grashof_tilde: 0.0,
        sigma,
        radius,
        k0: 0.0,
        k1: 0.0,
        k2: 0.0,
    };
    stats.fill_dependent(&p.constants);
    Ok(stats)
}

/// One gain condition: `mu <= bound` or `mu >= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub id: String,
    pub relation: String,
    pub mu: f64,
    #[serde(with = "crate::serde_float")]
    pub bound: f64,
    /// Positive when satisfied.
    #[serde(with = "crate::serde_float")]
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub constants: BTreeMap<String, f64>,
    pub n_obs: usize,
    pub delta_nu: f64,
    pub conditions: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn margin(&self, id: &str) -> Option<f64> {
        self.conditions.iter().find(|c| c.id == id).map(|c| c.margin)
    }
}

/// Identifiers of the gain conditions, in report order.
pub const CONDITION_IDS: [&str; 7] = [
    "mu_N_nu_tilde",
    "mu_N_nu",
    "ng_H2",
    "ng_H3",
    "sensitivity1",
    "sensitivity2",
    "power",
];

fn upper(id: &str, mu: f64, bound: f64) -> ConditionCheck {
    ConditionCheck {
        id: id.into(),
        relation: "mu <= bound".into(),
        mu,
        bound,
        margin: bound - mu,
        satisfied: mu <= bound,
    }
}

fn lower(id: &str, mu: f64, bound: f64) -> ConditionCheck {
    ConditionCheck {
        id: id.into(),
        relation: "mu >= bound".into(),
        mu,
        bound,
        margin: mu - bound,
        satisfied: mu >= bound,
    }
}

/// Evaluates every gain condition for `p` (with `Δν = ν̃ - ν`). Advisory only.
pub fn verify_mu_conditions(p: &SystemParams, stats: &ForceStats) -> ConditionReport {
    let c = &p.constants;
    let (nu, nt, mu) = (p.nu, p.nu_tilde, p.mu);
    let n2 = (p.n_obs * p.n_obs) as f64;
    let g = stats.grashof;
    let gt = modified_grashof(g, nu, nt, mu);
    let (s1, s2) = (stats.sigma(1), stats.sigma(2));
    let (at1, at2) = (c.alpha_tilde(1), c.alpha_tilde(2));
    let dnu = nt - nu;

    let k = 3.0;
    let sk = s2.powf(1.0 / k);
    let ng_h3 = nu
        * c.alpha(3).powi(2)
        * ((at1 * at1 + at2 * at2) * (s1.sqrt() + gt) * gt
            + at2.powf(2.0 / k)
                * (nu / nt).powf(1.0 - 2.0 / k)
                * ((sk + g) / g).powf(2.0 / k)
                * (s1.sqrt() + g)
                / (sk + g));
    let sens1 = c.get("c1")
        * nu
        * ((s1.sqrt() + g).powi(2) + (s2.cbrt() + g).powi(4)).powf(0.25)
        * (s2.cbrt() + g)
        * g;
    let sens2 = c.get("c2") * nu * (dnu.abs() / nu) * at2 * at2 * (s1.sqrt() + gt).powi(2) * gt * gt;
    let conditions = vec![
        upper("mu_N_nu_tilde", mu, c.get("c0_tilde") * n2 * nt),
        upper("mu_N_nu", mu, c.get("c0") * n2 * nu),
        lower("ng_H2", mu, nu * c.alpha(2).powi(2) * (nu / nt) * gt * gt),
        lower("ng_H3", mu, ng_h3),
        lower("sensitivity1", mu, sens1),
        lower("sensitivity2", mu, sens2),
        lower("power", mu, c.get("c4") * g.max(1.0).powi(2)),
    ];
    ConditionReport {
        constants: c.effective(),
        n_obs: p.n_obs,
        delta_nu: dnu,
        conditions,
    }
}
