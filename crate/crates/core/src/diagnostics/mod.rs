//! Functionals, identities, force statistics, gain conditions and bound
//! checks evaluated on live states.

pub mod algebra;
pub mod balance;
pub mod bounds;
pub mod decomposition;
pub mod force;
pub mod functionals;
pub mod record;

pub use algebra::{algebra_checks, AlgebraReport};
pub use balance::{backward_derivative, centered_derivative, fill_finite_differences, power_balance, PowerBalance};
pub use bounds::{bound_checks, bound_evaluations, h1_envelope_violations, BoundReport};
pub use decomposition::{update_error_decomposition, UpdateDecomposition};
pub use force::{force_stats, modified_grashof, verify_mu_conditions, ConditionReport, ForceStats};
pub use functionals::{compute_j, dissipation_d, edot_identity, energy_functionals, zdot_identity, EnergyFunctionals, JTerms};
pub use record::{to_csv, write_timeseries, DiagnosticsRecord, Recorder};
