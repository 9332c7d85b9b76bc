//! Pointwise algebraic relations every record must satisfy.

use serde::{Deserialize, Serialize};

use super::force::{modified_grashof, ForceStats};
use super::record::DiagnosticsRecord;

/// Relative slack for summation-order roundoff.
pub const ALGEBRA_REL_TOL: f64 = 1e-12;

pub const ALGEBRA_IDS: [&str; 10] = [
    "E_N<=E",
    "Z_N<=Z",
    "P_N<=P",
    "E<=Z",
    "Z<=P",
    "G<=G_tilde",
    "sigma>=1",
    "D>=0",
    "finite",
    "nonnegative_energies",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraCheck {
    pub id: String,
    pub samples: usize,
    pub violations: usize,
    #[serde(with = "crate::serde_float::option")]
    pub first_violation_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub rel_tol: f64,
    pub checks: Vec<AlgebraCheck>,
    pub total_violations: usize,
}

impl AlgebraReport {
    pub fn get(&self, id: &str) -> Option<&AlgebraCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + ALGEBRA_REL_TOL * a.abs().max(b.abs())
}

/// Checks projection monotonicity, the Poincaré chain, `G <= G̃`,
/// `σ_ℓ >= 1` and `D >= 0` at every record.
pub fn algebra_checks(records: &[DiagnosticsRecord], stats: &ForceStats) -> AlgebraReport {
    let mut checks: Vec<AlgebraCheck> = ALGEBRA_IDS
        .iter()
        .map(|id| AlgebraCheck {
            id: id.to_string(),
            samples: 0,
            violations: 0,
            first_violation_t: None,
        })
        .collect();
    let sigma_ok = stats.sigma.values().all(|&s| s >= 1.0 - ALGEBRA_REL_TOL);
    for r in records {
        let g = stats.grashof;
        let gt = modified_grashof(g, stats.nu, r.nu_tilde, stats.mu);
        let finite = [r.e, r.e_n, r.z, r.z_n, r.p, r.p_n, r.j1, r.j2, r.d, r.edot_n, r.zdot_n]
            .iter()
            .all(|v| v.is_finite());
        let outcomes = [
            le(r.e_n, r.e),
            le(r.z_n, r.z),
            le(r.p_n, r.p),
            le(r.e, r.z),
            le(r.z, r.p),
            le(g, gt),
            sigma_ok,
            r.d >= 0.0,
            finite,
            [r.e, r.e_n, r.z, r.z_n, r.p, r.p_n].iter().all(|&v| v >= 0.0),
        ];
        for (c, ok) in checks.iter_mut().zip(outcomes) {
            c.samples += 1;
            if !ok {
                c.violations += 1;
                c.first_violation_t.get_or_insert(r.t);
            }
        }
    }
    AlgebraReport {
        rel_tol: ALGEBRA_REL_TOL,
        total_violations: checks.iter().map(|c| c.violations).sum(),
        checks,
    }
}
