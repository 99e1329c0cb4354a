//! Discrete Gabor systems on Z_L: lattice parameters, windows and the
//! digital Gabor transform with its adjoint.
//!
//! Conventions used throughout:
//!
//! * `c[m, n] = sum_l x[l] * conj(g[(l - n*a) mod L]) * exp(-2 pi i m b l / L)`,
//!   translations are cyclic.
//! * Flattened coefficient vectors are n-major: entry `n * rows + m`.
//! * In positive-frequency mode only the rows `m = 0..=M/2` are kept.

mod params;
mod transform;
mod window;

pub use params::GaborParams;
pub use transform::{AnalysisOperator, FrameMatrix, GaborCoefficients, MAX_FRAME_ENTRIES};
pub use window::{make_window, WindowKind, WindowVector};
