use num_complex::Complex64;

use super::params::ForcingSpec;
use crate::error::{Error, Result};
use crate::spectral::{leray_project, GridSpec, SpectralField};

/// Canonical representatives of the `±k` pairs on the dealiased lattice
/// with `kmin <= |k| <= kmax`.
fn band_modes(grid: &GridSpec, kmin: f64, kmax: f64) -> Vec<(i64, i64)> {
    let c = grid.dealias_cutoff() as i64;
    let mut out = Vec::new();
    for k1 in 0..=c {
        for k2 in -c..=c {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if kk >= kmin && kk <= kmax {
                out.push((k1, k2));
            }
        }
    }
    out
}

pub(crate) fn validate_forcing(spec: &ForcingSpec, grid: &GridSpec) -> Vec<String> {
    let mut errs = Vec::new();
    match spec {
        ForcingSpec::SingleMode {
            wavenumber: [k1, k2],
            amplitude,
            phase,
        } => {
            if *k1 == 0 && *k2 == 0 {
                errs.push("forcing.wavenumber: must be nonzero".into());
            } else if !grid.is_dealiased_mode(*k1, *k2) {
                errs.push(format!(
                    "forcing.wavenumber: ({k1}, {k2}) exceeds dealias cutoff {}",
                    grid.dealias_cutoff()
                ));
            }
            if !amplitude.is_finite() || !phase.is_finite() {
                errs.push("forcing: amplitude and phase must be finite".into());
            }
        }
        ForcingSpec::Band {
            kmin,
            kmax,
            amplitude,
            phase,
        } => {
            if !(kmin.is_finite() && kmax.is_finite() && *kmin > 0.0 && kmin <= kmax) {
                errs.push(format!("forcing: need 0 < kmin <= kmax, got [{kmin}, {kmax}]"));
            } else if band_modes(grid, *kmin, *kmax).is_empty() {
                errs.push(format!("forcing: no lattice modes with {kmin} <= |k| <= {kmax}"));
            } else if *kmax > grid.dealias_cutoff() as f64 {
                errs.push(format!(
                    "forcing.kmax: {kmax} exceeds dealias cutoff {}",
                    grid.dealias_cutoff()
                ));
            }
            if !amplitude.is_finite() || !phase.is_finite() {
                errs.push("forcing: amplitude and phase must be finite".into());
            }
        }
    }
    errs
}

/// Builds `g = P_σ f` on `grid`.
pub fn make_forcing(spec: &ForcingSpec, grid: GridSpec) -> Result<SpectralField> {
    if let Some(msg) = validate_forcing(spec, &grid).into_iter().next() {
        return Err(match spec {
            ForcingSpec::SingleMode {
                wavenumber: [k1, k2],
                ..
            } if !grid.is_dealiased_mode(*k1, *k2) => Error::WavenumberOutOfRange {
                k1: *k1,
                k2: *k2,
                cutoff: grid.dealias_cutoff(),
            },
            _ => Error::InvalidParameter(msg),
        });
    }
    let (modes, amplitude, phase) = match spec {
        ForcingSpec::SingleMode {
            wavenumber: [k1, k2],
            amplitude,
            phase,
        } => (vec![(*k1, *k2)], *amplitude, *phase),
        ForcingSpec::Band {
            kmin,
            kmax,
            amplitude,
            phase,
        } => (band_modes(&grid, *kmin, *kmax), *amplitude, *phase),
    };
    let mut f = SpectralField::zeros(grid);
    for (k1, k2) in modes {
        let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
        // sin(θ) = (e^{iθ} - e^{-iθ}) / 2i
        let c = Complex64::from_polar(amplitude, phase) * Complex64::new(0.0, -0.5);
        f.set_mode(k1, k2, [c * (k2 as f64 / kk), c * (-(k1 as f64) / kk)])?;
    }
    leray_project(&f)
}
