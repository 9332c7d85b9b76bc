use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spectral::GridSpec;

/// External force descriptor. The resulting field is `P_σ f`.
///
/// Each forced wavevector `k` contributes `amplitude · k⊥/|k| · sin(k·x + phase)`
/// with `k⊥ = (k₂, -k₁)`, which is divergence-free by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    /// A single `±k` pair. `wavenumber = [0, k_f]` gives the Kolmogorov
    /// force `(amplitude · sin(k_f y), 0)`.
    SingleMode {
        wavenumber: [i64; 2],
        #[serde(default = "unit_amplitude")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Every lattice pair with `kmin <= |k| <= kmax`, equal amplitudes.
    Band {
        kmin: f64,
        kmax: f64,
        #[serde(default = "unit_amplitude")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn unit_amplitude() -> f64 {
    1.0
}

impl ForcingSpec {
    pub fn kolmogorov(k_f: i64, amplitude: f64) -> Self {
        ForcingSpec::SingleMode {
            wavenumber: [0, k_f],
            amplitude,
            phase: 0.0,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            ForcingSpec::SingleMode { amplitude, .. } | ForcingSpec::Band { amplitude, .. } => {
                *amplitude
            }
        }
    }

    pub fn with_amplitude(&self, a: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ForcingSpec::SingleMode { amplitude, .. } | ForcingSpec::Band { amplitude, .. } => {
                *amplitude = a
            }
        }
        out
    }
}

/// Overrides for the unnamed absolute constants appearing in the
/// parameter conditions and bounds. Every constant defaults to 1.
///
/// Recognised keys: `c0`, `c0_tilde`, `c1`..`c4`, `C` (the constant in the
/// `K₀`, `K₁` sensitivity constants), `ck_<k>` (absorbing-ball radius
/// prefactor for `R_k`), `alpha_<k>` and `alpha_tilde_<k>` for `k = 1..=9`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TheoremConstants(pub BTreeMap<String, f64>);

impl TheoremConstants {
    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(1.0)
    }

    pub fn alpha(&self, k: u32) -> f64 {
        self.get(&format!("alpha_{k}"))
    }

    pub fn alpha_tilde(&self, k: u32) -> f64 {
        self.get(&format!("alpha_tilde_{k}"))
    }

    pub fn radius(&self, k: u32) -> f64 {
        self.get(&format!("ck_{k}"))
    }

    pub fn set(&mut self, key: &str, value: f64) -> &mut Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn is_known_key(key: &str) -> bool {
        const PLAIN: [&str; 7] = ["c0", "c0_tilde", "c1", "c2", "c3", "c4", "C"];
        if PLAIN.contains(&key) {
            return true;
        }
        ["ck_", "alpha_tilde_", "alpha_"].iter().any(|p| {
            key.strip_prefix(p)
                .and_then(|k| k.parse::<u32>().ok())
                .is_some_and(|k| (1..=9).contains(&k))
        })
    }

    /// Every key and value, with defaults filled in for the plain constants.
    pub fn effective(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = ["c0", "c0_tilde", "c1", "c2", "c3", "c4", "C"]
            .iter()
            .map(|k| (k.to_string(), self.get(k)))
            .collect();
        out.extend(self.0.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (k, v) in &self.0 {
            if !Self::is_known_key(k) {
                errs.push(format!("constants.{k}: unknown constant"));
            } else if !(v.is_finite() && *v > 0.0) {
                errs.push(format!("constants.{k}: must be finite and > 0, got {v}"));
            }
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// True viscosity of the reference flow.
    pub nu: f64,
    /// Viscosity used by the observer.
    pub nu_tilde: f64,
    /// Nudging gain.
    pub mu: f64,
    /// Observation cutoff `N`: modes with `|k| <= N` are observed.
    pub n_obs: usize,
    pub dt: f64,
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub constants: TheoremConstants,
}

impl SystemParams {
    /// Lists every violated invariant, prefixed with the field path.
    pub fn validate(&self, grid: &GridSpec) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("system.{name}: must be finite and > 0, got {v}"));
            }
        };
        positive("nu", self.nu, &mut errs);
        positive("nu_tilde", self.nu_tilde, &mut errs);
        positive("dt", self.dt, &mut errs);
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            errs.push(format!("system.mu: must be finite and >= 0, got {}", self.mu));
        }
        if self.n_obs < 1 || self.n_obs > grid.dealias_cutoff() {
            errs.push(format!(
                "system.n_obs: must lie in 1..={}, got {}",
                grid.dealias_cutoff(),
                self.n_obs
            ));
        }
        errs.extend(super::forcing::validate_forcing(&self.forcing, grid));
        errs.extend(self.constants.validate());
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_keys() {
        assert!(TheoremConstants::is_known_key("c0_tilde"));
        assert!(TheoremConstants::is_known_key("alpha_tilde_2"));
        assert!(TheoremConstants::is_known_key("ck_3"));
        assert!(!TheoremConstants::is_known_key("alpha_0"));
        assert!(!TheoremConstants::is_known_key("c5"));
        let mut c = TheoremConstants::default();
        assert_eq!(c.alpha_tilde(2), 1.0);
        c.set("alpha_tilde_2", 0.25);
        assert_eq!(c.alpha_tilde(2), 0.25);
        c.set("bogus", 1.0).set("c1", -1.0);
        assert_eq!(c.validate().len(), 2);
    }

    #[test]
    fn forcing_spec_toml_shape() {
        let f: ForcingSpec =
            toml::from_str("kind = \"single_mode\"\nwavenumber = [0, 2]\namplitude = 0.5\n").unwrap();
        assert_eq!(f, ForcingSpec::kolmogorov(2, 0.5));
        let bad = toml::from_str::<ForcingSpec>(
            "kind = \"single_mode\"\nwavenumber = [0, 2]\namplitude = 0.5\nextra = 1\n",
        );
        assert!(bad.is_err());
    }
}
