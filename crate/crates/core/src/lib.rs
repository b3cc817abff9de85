//! Spectral analysis of the damped wave equation on the unit disk with a
//! dynamic Wentzell boundary condition.
//!
//! * [`special`]: Bessel functions `J_n` at complex arguments and zeros of `J_0`.
//! * [`roots`]: roots of the characteristic equation of the quadratic pencil.
//! * [`disc`]: per-mode radial spectral-element discretization, resolvent norms, Hautus probe.
//! * [`time`]: Newmark time stepping, modal synthesis and decay fitting.

pub mod disc;
pub mod error;
pub mod linalg;
pub mod roots;
pub mod special;
pub mod time;

pub use error::{Error, Result};

/// Version string recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
