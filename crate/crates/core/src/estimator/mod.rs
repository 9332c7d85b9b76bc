//! Recursive viscosity estimation: the update formula, its guards, the
//! update-time policy and the outer loop.

pub mod config;
pub mod run;
pub mod update;

pub use config::EstimatorConfig;
pub use run::{run_estimation, run_estimation_into, EstimationTrace, IdentityCheck, SkipReason, UpdateRecord};
pub use update::{
    check_nondegeneracy, compute_update, plateau_deviation, select_update_time, NondegeneracyReport,
    UpdateDecision, WaitReason,
};
