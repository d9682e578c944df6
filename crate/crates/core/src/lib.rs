//! Generalized finite-difference time-domain (G-FDTD) solver for the linear
//! time-dependent Schrödinger equation on 1-D and 2-D grids.
//!
//! The wavefunction is split into real and imaginary planes advanced on
//! staggered half steps. Each update applies a truncated odd Taylor series of
//! the generator `B = (ħ/2m)∇² − V/ħ`, which relaxes the time-step limit of
//! the classic FDTD scheme (the `N = 0` case).
//!
//! * [`field`]: grids, wavefunctions, potentials, norms.
//! * [`stencil`]: second/fourth-order Laplacians and powers of `B`.
//! * [`scheme`]: the leapfrog steppers.
//! * [`stability`]: Von Neumann analysis (endpoint test and wavenumber scan).
//! * [`scenario`]: Gaussian packet on a barrier, observables, the run driver.
//! * [`io`]: configuration and output formats.

pub mod error;
pub mod field;
pub mod io;
pub mod scenario;
pub mod scheme;
pub mod stability;
pub mod stencil;

pub use error::{Result, SolverError};
pub use field::{norm, normalize, GridSpec, PhysicalParams, PotentialField, WaveField};
pub use scheme::{SchemeConfig, Stepper};
pub use stencil::{apply_b, apply_b_power, apply_laplacian, BoundaryPolicy, StencilOrder};
