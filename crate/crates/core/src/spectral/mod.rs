//! Fourier representation of periodic vector fields on `[0, 2π]²`.

mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod snapshot;

pub use field::{SpectralField, PLANCHEREL};
pub use grid::GridSpec;
pub use ops::{bilinear, highpass, inner_hs, leray_project, lowpass, norm_hs, stokes_apply};
