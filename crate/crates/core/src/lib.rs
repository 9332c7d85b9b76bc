//! Pseudo-spectral twin experiments for recovering the kinematic viscosity
//! of the forced 2D incompressible Navier–Stokes equations on the periodic
//! box from low-mode observations, using a nudged observer and a recursive
//! viscosity update.
//!
//! * [`spectral`]: Fourier fields and the exact operators (Leray, Stokes,
//!   dealiased bilinear form, low-pass filter, Sobolev norms).
//! * [`flow`]: forcing and the time-stepped reference/observer pair.
//! * [`estimator`]: the guarded viscosity update and the outer loop.
//! * [`diagnostics`]: energy functionals, balance identities, force
//!   statistics, parameter conditions and bound checks.
//! * [`harness`]: experiment configuration and orchestration.

pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod flow;
pub mod harness;
mod serde_float;
pub mod spectral;

pub use error::{Error, Result};
