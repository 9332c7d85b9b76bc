//! Breakdown of the post-update viscosity error into the four terms that
//! control it.

use serde::{Deserialize, Serialize};

use super::functionals::{compute_j, edot_identity, energy_functionals};
use crate::error::Result;
use crate::spectral::SpectralField;

/// `|Ė_N|`, `2νZ_N`, `|⟨B(w,w_N), Q_N w⟩|`, `|⟨(DB_N u)w, w_N⟩|`, their sum,
/// and the sum over `|⟨Aũ_N, w_N⟩|`, which bounds `|ν_{m+1} - ν|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateDecomposition {
    pub edot_abs: f64,
    pub dissipation: f64,
    pub transfer_abs: f64,
    pub coupling_abs: f64,
    pub sum: f64,
    pub denominator: f64,
    /// `sum / |denominator|`; `None` when the denominator vanishes.
    #[serde(with = "crate::serde_float::option")]
    pub budget: Option<f64>,
    pub degenerate: bool,
}

/// Evaluates the decomposition on left-limit states. `nu` is the true
/// viscosity and `nu_est` the observer viscosity in force before the update;
/// `Ė_N` is taken from the balance identity.
pub fn update_error_decomposition(
    u: &SpectralField,
    u_tilde: &SpectralField,
    w: &SpectralField,
    n_obs: usize,
    mu: f64,
    nu: f64,
    nu_est: f64,
) -> Result<UpdateDecomposition> {
    let f = energy_functionals(w, n_obs)?;
    let j = compute_j(u, u_tilde, w, n_obs, nu_est - nu)?;
    let edot = edot_identity(j.j1, f.e_n, f.z_n, mu, nu);
    let parts = [edot.abs(), 2.0 * nu * f.z_n, j.transfer.abs(), j.coupling.abs()];
    let sum: f64 = parts.iter().sum();
    let degenerate = j.denominator == 0.0 || !j.denominator.is_finite();
    Ok(UpdateDecomposition {
        edot_abs: parts[0],
        dissipation: parts[1],
        transfer_abs: parts[2],
        coupling_abs: parts[3],
        sum,
        denominator: j.denominator,
        budget: (!degenerate).then(|| sum / j.denominator.abs()),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn zero_error_gives_zero_terms() {
        let g = GridSpec::new(16).unwrap();
        let u = SpectralField::from_fn(g, |_, y| [y.sin(), 0.0]);
        let d = update_error_decomposition(&u, &u, &SpectralField::zeros(g), 3, 5.0, 0.1, 0.1).unwrap();
        assert_eq!(d.sum, 0.0);
        assert!(d.degenerate);
        assert_eq!(d.budget, None);
    }
}
