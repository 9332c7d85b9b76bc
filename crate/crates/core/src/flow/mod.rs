//! Time integration of the reference flow and the nudged observer.

pub mod checkpoint;
pub mod forcing;
pub mod params;
pub mod stepper;

pub use checkpoint::Checkpoint;
pub use forcing::make_forcing;
pub use params::{ForcingSpec, SystemParams, TheoremConstants};
pub use stepper::{DiagnosticsSink, FlowModel, NoDiagnostics, PairState, SpinUpReport};
