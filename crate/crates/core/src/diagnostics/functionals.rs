//! Energy functionals of the sensitivity variable and the transfer terms
//! entering its low-mode balance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bilinear, inner_hs, lowpass, norm_hs, stokes_apply, SpectralField};

/// Relative tolerance on `w = ũ - u` in [`compute_j`].
pub const W_CONSISTENCY_TOL: f64 = 1e-10;

/// `E = ½|w|²`, `Z = ½‖w‖²`, `P = ½|Aw|²` and their `P_N` counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyFunctionals {
    pub e: f64,
    pub e_n: f64,
    pub z: f64,
    pub z_n: f64,
    pub p: f64,
    pub p_n: f64,
}

pub fn energy_functionals(w: &SpectralField, n_obs: usize) -> Result<EnergyFunctionals> {
    let w_n = lowpass(w, n_obs)?;
    let half_sq = |v: &SpectralField, s: f64| 0.5 * norm_hs(v, s).powi(2);
    Ok(EnergyFunctionals {
        e: half_sq(w, 0.0),
        e_n: half_sq(&w_n, 0.0),
        z: half_sq(w, 1.0),
        z_n: half_sq(&w_n, 1.0),
        p: half_sq(w, 2.0),
        p_n: half_sq(&w_n, 2.0),
    })
}

/// The terms of the low-mode balance at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JTerms {
    pub j1: f64,
    pub j2: f64,
    /// `⟨B(w, w_N), Q_N w⟩`.
    pub transfer: f64,
    /// `⟨(DB_N u) w, w_N⟩` with `(DB u) w = B(u, w) + B(w, u)`.
    pub coupling: f64,
    /// `⟨A ũ_N, w_N⟩`, the denominator of the viscosity update.
    pub denominator: f64,
}

/// `J₁ = ⟨B(w,w_N), Q_N w⟩ - ⟨(DB_N u)w, w_N⟩ - Δν⟨Aũ_N, w_N⟩` and
/// `J₂ = -⟨B_N(w,w), Aw_N⟩ - ⟨(DB_N u)w, Aw_N⟩ - Δν⟨Aũ_N, Aw_N⟩`.
pub fn compute_j(
    u: &SpectralField,
    u_tilde: &SpectralField,
    w: &SpectralField,
    n_obs: usize,
    delta_nu: f64,
) -> Result<JTerms> {
    let mismatch = (&(u_tilde - u) - w).max_abs();
    let scale = u.max_abs().max(u_tilde.max_abs()).max(w.max_abs());
    if mismatch > W_CONSISTENCY_TOL * scale {
        return Err(Error::ContractViolation(format!(
            "w differs from ũ - u by {mismatch:e} (scale {scale:e})"
        )));
    }
    let w_n = lowpass(w, n_obs)?;
    let q_w = w - &w_n;
    let ut_n = lowpass(u_tilde, n_obs)?;
    let a_ut_n = stokes_apply(&ut_n, 2.0);
    let a_w_n = stokes_apply(&w_n, 2.0);

    let transfer = inner_hs(&bilinear(w, &w_n)?, &q_w, 0.0)?;
    let mut db = bilinear(u, w)?;
    db.axpy(1.0, &bilinear(w, u)?);
    let coupling = inner_hs(&db, &w_n, 0.0)?;
    let denominator = inner_hs(&a_ut_n, &w_n, 0.0)?;
    let j1 = transfer - coupling - delta_nu * denominator;

    let bww = inner_hs(&bilinear(w, w)?, &a_w_n, 0.0)?;
    let j2 = -bww - inner_hs(&db, &a_w_n, 0.0)? - delta_nu * inner_hs(&a_ut_n, &a_w_n, 0.0)?;
    Ok(JTerms {
        j1,
        j2,
        transfer,
        coupling,
        denominator,
    })
}

/// `Ė_N = J₁ - 2μE_N - 2νZ_N`.
pub fn edot_identity(j1: f64, e_n: f64, z_n: f64, mu: f64, nu: f64) -> f64 {
    j1 - 2.0 * mu * e_n - 2.0 * nu * z_n
}

/// `Ż_N = J₂ - 2μZ_N - 2νP_N`.
pub fn zdot_identity(j2: f64, z_n: f64, p_n: f64, mu: f64, nu: f64) -> f64 {
    j2 - 2.0 * mu * z_n - 2.0 * nu * p_n
}

/// `D = 8μ³E_N² + 32μ²νE_N Z_N + 16μν²E_N P_N + 16ν³Z_N P_N + 24μν²Z_N² + 2μJ₁²`.
pub fn dissipation_d(e_n: f64, z_n: f64, p_n: f64, j1: f64, mu: f64, nu: f64) -> f64 {
    8.0 * mu.powi(3) * e_n * e_n
        + 32.0 * mu * mu * nu * e_n * z_n
        + 16.0 * mu * nu * nu * e_n * p_n
        + 16.0 * nu.powi(3) * z_n * p_n
        + 24.0 * mu * nu * nu * z_n * z_n
        + 2.0 * mu * j1 * j1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn shear_functionals() {
        let g = GridSpec::new(16).unwrap();
        let c = 0.3;
        let w = SpectralField::from_fn(g, |_, y| [c * y.sin(), 0.0]);
        let f = energy_functionals(&w, 2).unwrap();
        let expect = PI * PI * c * c;
        for v in [f.e, f.e_n, f.z, f.z_n, f.p, f.p_n] {
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn high_mode_invisible_to_projection() {
        let g = GridSpec::new(16).unwrap();
        let w = SpectralField::from_fn(g, |_, y| [(3.0 * y).sin(), 0.0]);
        let f = energy_functionals(&w, 2).unwrap();
        assert!(f.e > 0.0);
        assert!(f.e_n < 1e-28 && f.z_n < 1e-28 && f.p_n < 1e-28);
    }

    #[test]
    fn zero_error_gives_zero_j() {
        let g = GridSpec::new(16).unwrap();
        let u = SpectralField::from_fn(g, |x, y| [y.sin() + (2.0 * x).cos(), x.cos()]);
        let u = crate::spectral::leray_project(&u.dealiased()).unwrap();
        let j = compute_j(&u, &u, &SpectralField::zeros(g), 3, 0.2).unwrap();
        assert_eq!((j.j1, j.j2), (0.0, 0.0));
    }

    #[test]
    fn rejects_inconsistent_w() {
        let g = GridSpec::new(16).unwrap();
        let u = SpectralField::from_fn(g, |_, y| [y.sin(), 0.0]);
        let z = SpectralField::zeros(g);
        assert!(matches!(
            compute_j(&u, &z, &z, 3, 0.0),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn dissipation_arithmetic() {
        assert_eq!(dissipation_d(0.0, 0.0, 0.0, 0.0, 1.0, 1.0), 0.0);
        assert_eq!(dissipation_d(1.0, 1.0, 1.0, 0.0, 1.0, 1.0), 96.0);
        assert_eq!(dissipation_d(0.0, 0.0, 0.0, 3.0, 2.0, 1.0), 2.0 * 2.0 * 9.0);
    }
}
