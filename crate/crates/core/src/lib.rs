//! Spectral laboratory for the nonlinear Schrödinger equation
//! i ∂ₜu + Δu = λ|u|ᵖu on a periodic box [-L/2, L/2)ᵈ.
//!
//! The crate provides a unitary discrete Fourier layer ([`grid`], [`field`],
//! [`fft`]), the free and potential-perturbed Schrödinger propagators
//! ([`propagator`]), norms and nonlinear functionals ([`functionals`],
//! [`trajectory`]), two independent time-evolution routes — a Strang
//! split-step integrator and a Duhamel/Picard fixed-point solver
//! ([`solver`]) — and a config-driven command layer ([`config`], [`run`])
//! used by the `nls-lab` binary.

use std::sync::atomic::{AtomicUsize, Ordering};

pub mod config;
pub mod error;
pub mod fft;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod propagator;
pub mod run;
pub mod solver;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Field, Space};
pub use grid::Grid;

static THREAD_CAP: AtomicUsize = AtomicUsize::new(1);

/// Caps the number of worker threads used by internally parallel kernels.
///
/// Results are bitwise independent of the cap: every output node keeps a
/// fixed summation order. The `nls-lab` binary sets this from the
/// `NLS_LAB_THREADS` environment variable.
pub fn set_thread_cap(n: usize) {
    THREAD_CAP.store(n.max(1), Ordering::Relaxed);
}

/// Current worker-thread cap (at least 1).
pub fn thread_cap() -> usize {
    THREAD_CAP.load(Ordering::Relaxed).max(1)
}
