//! Per-step diagnostics records and their CSV layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::balance::fill_finite_differences;
use super::force::{verify_mu_conditions, ForceStats, CONDITION_IDS};
use super::functionals::{compute_j, dissipation_d, edot_identity, energy_functionals, zdot_identity};
use crate::error::{Error, Result};
use crate::flow::{DiagnosticsSink, FlowModel, PairState};
use crate::spectral::norm_hs;

/// First line of every diagnostics CSV.
pub const CSV_VERSION_LINE: &str = "# nse-nudge diagnostics v1";

/// Sobolev indices reported for `u`, `ũ` and `w`.
pub const NORM_INDICES: [u32; 4] = [0, 1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub nu_tilde: f64,
    pub e: f64,
    pub e_n: f64,
    pub z: f64,
    pub z_n: f64,
    pub p: f64,
    pub p_n: f64,
    /// `Ė_N` from the balance identity.
    pub edot_n: f64,
    /// `Ė_N` from finite differences of `E_N`; NaN where unavailable.
    #[serde(with = "crate::serde_float")]
    pub edot_n_fd: f64,
    pub zdot_n: f64,
    #[serde(with = "crate::serde_float")]
    pub zdot_n_fd: f64,
    pub j1: f64,
    pub j2: f64,
    pub d: f64,
    /// `⟨A ũ_N, w_N⟩`.
    pub denominator: f64,
    /// `|⟨A ũ_N, w_N⟩| / ν̃²`, comparable with `ε`.
    pub nondegen_margin: f64,
    pub transfer: f64,
    pub coupling: f64,
    /// `‖u‖_{H^s}` for `s` in [`NORM_INDICES`].
    pub u_norms: [f64; 4],
    pub u_tilde_norms: [f64; 4],
    pub w_norms: [f64; 4],
    /// Signed margins of the gain conditions, keyed by condition id.
    #[serde(with = "margins_serde")]
    pub condition_margins: BTreeMap<String, f64>,
}

mod margins_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct F(#[serde(with = "crate::serde_float")] f64);

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, v)| (k, F(*v))).collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        Ok(BTreeMap::<String, F>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| (k, v.0))
            .collect())
    }
}

impl DiagnosticsRecord {
    /// Evaluates every diagnostic on `state` for the model's current
    /// parameters. `stats` must describe the same force and `ν`.
    pub fn capture(model: &FlowModel, state: &PairState, stats: &ForceStats) -> Result<Self> {
        let p = model.params();
        let w = state.error();
        let f = energy_functionals(&w, p.n_obs)?;
        let j = compute_j(&state.u, &state.u_tilde, &w, p.n_obs, p.nu_tilde - p.nu)?;
        let norms = |v| NORM_INDICES.map(|s| norm_hs(v, s as f64));
        let stats = if stats.nu_tilde == p.nu_tilde {
            stats.clone()
        } else {
            stats.with_nu_tilde(p.nu_tilde, &p.constants)
        };
        let report = verify_mu_conditions(p, &stats);
        Ok(Self {
            t: state.t,
            nu_tilde: p.nu_tilde,
            e: f.e,
            e_n: f.e_n,
            z: f.z,
            z_n: f.z_n,
            p: f.p,
            p_n: f.p_n,
            edot_n: edot_identity(j.j1, f.e_n, f.z_n, p.mu, p.nu),
            edot_n_fd: f64::NAN,
            zdot_n: zdot_identity(j.j2, f.z_n, f.p_n, p.mu, p.nu),
            zdot_n_fd: f64::NAN,
            j1: j.j1,
            j2: j.j2,
            d: dissipation_d(f.e_n, f.z_n, f.p_n, j.j1, p.mu, p.nu),
            denominator: j.denominator,
            nondegen_margin: j.denominator.abs() / (p.nu_tilde * p.nu_tilde),
            transfer: j.transfer,
            coupling: j.coupling,
            u_norms: norms(&state.u),
            u_tilde_norms: norms(&state.u_tilde),
            w_norms: norms(&w),
            condition_margins: report
                .conditions
                .iter()
                .map(|c| (c.id.clone(), c.margin))
                .collect(),
        })
    }
}

/// Sink that captures a record every `stride` steps.
pub struct Recorder {
    stride: usize,
    steps: usize,
    stats: ForceStats,
    records: Vec<DiagnosticsRecord>,
}

impl Recorder {
    pub fn new(stride: usize, stats: ForceStats) -> Self {
        Self {
            stride: stride.max(1),
            steps: 0,
            stats,
            records: Vec::new(),
        }
    }

    /// Captures a record now, independent of the stride.
    pub fn record(&mut self, model: &FlowModel, state: &PairState) -> Result<()> {
        if self.stats.nu_tilde != model.params().nu_tilde {
            self.stats = self.stats.with_nu_tilde(model.params().nu_tilde, &model.params().constants);
        }
        self.records.push(DiagnosticsRecord::capture(model, state, &self.stats)?);
        Ok(())
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    /// Fills the finite-difference columns and returns the records.
    pub fn finish(mut self) -> Vec<DiagnosticsRecord> {
        fill_finite_differences(&mut self.records);
        self.records
    }
}

impl DiagnosticsSink for Recorder {
    fn on_step(&mut self, model: &FlowModel, state: &PairState) -> Result<()> {
        self.steps += 1;
        if self.steps.is_multiple_of(self.stride) {
            self.record(model, state)?;
        }
        Ok(())
    }
}

/// Column names in file order.
pub fn csv_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "t", "nu_tilde", "E", "E_N", "Z", "Z_N", "P", "P_N", "Edot_N", "Edot_N_fd", "Zdot_N",
        "Zdot_N_fd", "J1", "J2", "D", "denominator", "nondegen_margin", "transfer", "coupling",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for field in ["u", "ut", "w"] {
        for s in NORM_INDICES {
            cols.push(format!("{field}_h{s}"));
        }
    }
    cols.extend(CONDITION_IDS.iter().map(|id| format!("margin_{id}")));
    cols
}

fn push_float(line: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(line, ",{v:e}");
    } else if v.is_nan() {
        line.push_str(",nan");
    } else if v > 0.0 {
        line.push_str(",inf");
    } else {
        line.push_str(",-inf");
    }
}

pub fn to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\n{}\n", csv_columns().join(","));
    for r in records {
        let mut line = format!("{:e}", r.t);
        for v in [
            r.nu_tilde, r.e, r.e_n, r.z, r.z_n, r.p, r.p_n, r.edot_n, r.edot_n_fd, r.zdot_n,
            r.zdot_n_fd, r.j1, r.j2, r.d, r.denominator, r.nondegen_margin, r.transfer, r.coupling,
        ] {
            push_float(&mut line, v);
        }
        for v in r.u_norms.iter().chain(&r.u_tilde_norms).chain(&r.w_norms) {
            push_float(&mut line, *v);
        }
        for id in CONDITION_IDS {
            push_float(&mut line, r.condition_margins.get(id).copied().unwrap_or(f64::NAN));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_timeseries(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    fs::write(path, to_csv(records)).map_err(|e| Error::io(path, e))
}
