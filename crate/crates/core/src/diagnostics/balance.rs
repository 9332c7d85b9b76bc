//! Finite-difference cross-checks of the low-mode power balance.

use serde::{Deserialize, Serialize};

use super::functionals::{edot_identity, zdot_identity};
use super::record::DiagnosticsRecord;
use crate::error::{Error, Result};

/// Second-order derivative at the middle of three samples, valid for
/// unequal spacing.
pub fn centered_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let (ha, hb) = (t[1] - t[0], t[2] - t[1]);
    (ha * ha * f[2] - hb * hb * f[0] + (hb * hb - ha * ha) * f[1]) / (ha * hb * (ha + hb))
}

/// Second-order one-sided derivative at the last of three samples.
pub fn backward_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let (h2, h1) = (t[1] - t[0], t[2] - t[1]);
    (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[2] - (h1 + h2) / (h1 * h2) * f[1]
        + h1 / (h2 * (h1 + h2)) * f[0]
}

/// Fills `edot_n_fd` and `zdot_n_fd` by centered differences inside each
/// run of records sharing the same `ν̃`. Endpoints stay NaN.
pub fn fill_finite_differences(records: &mut [DiagnosticsRecord]) {
    for r in records.iter_mut() {
        r.edot_n_fd = f64::NAN;
        r.zdot_n_fd = f64::NAN;
    }
    for i in 1..records.len().saturating_sub(1) {
        let (a, b, c) = (&records[i - 1], &records[i], &records[i + 1]);
        if a.nu_tilde != b.nu_tilde || b.nu_tilde != c.nu_tilde {
            continue;
        }
        let t = [a.t, b.t, c.t];
        let e = centered_derivative(t, [a.e_n, b.e_n, c.e_n]);
        let z = centered_derivative(t, [a.z_n, b.z_n, c.z_n]);
        records[i].edot_n_fd = e;
        records[i].zdot_n_fd = z;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub t: f64,
    pub edot_n: f64,
    pub edot_n_fd: f64,
    pub zdot_n: f64,
    pub zdot_n_fd: f64,
    /// Identity minus finite difference.
    pub residual_e: f64,
    pub residual_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBalance {
    pub points: Vec<BalancePoint>,
    pub max_residual_e: f64,
    pub max_residual_z: f64,
}

/// Evaluates `Ė_N = J₁ - 2μE_N - 2νZ_N` and `Ż_N = J₂ - 2μZ_N - 2νP_N` on a
/// window of records and compares them with centered differences of `E_N`
/// and `Z_N`. Records must share one `ν̃`.
pub fn power_balance(records: &[DiagnosticsRecord], mu: f64, nu: f64) -> Result<PowerBalance> {
    if records.len() < 3 {
        return Err(Error::WindowTooShort {
            needed: 3,
            got: records.len(),
        });
    }
    if records.windows(2).any(|w| w[0].nu_tilde != w[1].nu_tilde) {
        return Err(Error::ContractViolation(
            "power balance window spans a viscosity update".into(),
        ));
    }
    let mut points = Vec::with_capacity(records.len() - 2);
    for w in records.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let t = [a.t, b.t, c.t];
        let edot = edot_identity(b.j1, b.e_n, b.z_n, mu, nu);
        let zdot = zdot_identity(b.j2, b.z_n, b.p_n, mu, nu);
        let edot_fd = centered_derivative(t, [a.e_n, b.e_n, c.e_n]);
        let zdot_fd = centered_derivative(t, [a.z_n, b.z_n, c.z_n]);
        points.push(BalancePoint {
            t: b.t,
            edot_n: edot,
            edot_n_fd: edot_fd,
            zdot_n: zdot,
            zdot_n_fd: zdot_fd,
            residual_e: edot - edot_fd,
            residual_z: zdot - zdot_fd,
        });
    }
    let max_abs = |f: fn(&BalancePoint) -> f64| points.iter().map(|p| f(p).abs()).fold(0.0, f64::max);
    Ok(PowerBalance {
        max_residual_e: max_abs(|p| p.residual_e),
        max_residual_z: max_abs(|p| p.residual_z),
        points,
    })
}
