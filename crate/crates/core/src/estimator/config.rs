use serde::{Deserialize, Serialize};

/// Settings of the recursive viscosity estimator.
///
/// `min_wait` and `plateau_window` default to `1/μ` and `5/μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Initial observer viscosity `ν₀`.
    pub nu0: f64,
    /// Non-degeneracy threshold: an update needs `|⟨Aũ_N, w_N⟩| >= ε ν̃²`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Minimum time between update attempts.
    #[serde(default)]
    pub min_wait: Option<f64>,
    /// Length of the trailing window over which `E_N` must be flat.
    #[serde(default)]
    pub plateau_window: Option<f64>,
    /// Largest relative deviation of `E_N` over the window.
    #[serde(default = "default_plateau_tol")]
    pub plateau_tol: f64,
    /// Number of accepted updates after which the estimator stops.
    #[serde(default = "default_max_updates")]
    pub max_updates: usize,
}

fn default_epsilon() -> f64 {
    1e-9
}

fn default_plateau_tol() -> f64 {
    1e-3
}

fn default_max_updates() -> usize {
    8
}

impl EstimatorConfig {
    pub fn new(nu0: f64) -> Self {
        Self {
            nu0,
            epsilon: default_epsilon(),
            min_wait: None,
            plateau_window: None,
            plateau_tol: default_plateau_tol(),
            max_updates: default_max_updates(),
        }
    }

    pub fn min_wait(&self, mu: f64) -> f64 {
        self.min_wait.unwrap_or(1.0 / mu)
    }

    pub fn plateau_window(&self, mu: f64) -> f64 {
        self.plateau_window.unwrap_or(5.0 / mu)
    }

    /// Lists every violated invariant, prefixed with the field path.
    pub fn validate(&self, dt: f64) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("estimator.{name}: must be finite and > 0, got {v}"));
            }
        };
        positive("nu0", self.nu0, &mut errs);
        positive("epsilon", self.epsilon, &mut errs);
        positive("plateau_tol", self.plateau_tol, &mut errs);
        if let Some(w) = self.min_wait {
            if !(w.is_finite() && w >= dt) {
                errs.push(format!("estimator.min_wait: must be >= dt = {dt}, got {w}"));
            }
        }
        if let Some(w) = self.plateau_window {
            positive("plateau_window", w, &mut errs);
        }
        if self.max_updates == 0 {
            errs.push("estimator.max_updates: must be >= 1".into());
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_gain() {
        let c: EstimatorConfig = toml::from_str("nu0 = 0.1").unwrap();
        assert_eq!(c, EstimatorConfig::new(0.1));
        assert_eq!(c.min_wait(20.0), 0.05);
        assert_eq!(c.plateau_window(20.0), 0.25);
        assert!(c.validate(0.01).is_empty());
    }

    #[test]
    fn validation_names_fields() {
        let mut c = EstimatorConfig::new(-0.1);
        c.min_wait = Some(0.001);
        let errs = c.validate(0.01);
        assert_eq!(errs.len(), 2);
        assert!(errs[0].contains("estimator.nu0"));
        assert!(errs[1].contains("estimator.min_wait"));
    }
}
