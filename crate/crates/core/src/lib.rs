//! Time-fractional Schrödinger-type evolution `i D_t^α u + A u + F(u) = 0`
//! solved through Mittag-Leffler spectral propagators.
//!
//! * [`mittag_leffler`]: evaluation of `E_{α,β}(z)`.
//! * [`calculus`]: fractional integrals, Caputo derivatives, graded meshes,
//!   the fractional Gronwall bound and the growth admissibility test.
//! * [`spectral`]: finite selfadjoint operators (FFT-diagonal or dense) and
//!   the propagators `S_t`, `P_t`.
//! * [`solver`]: Duhamel integrator, Picard iteration, continuation with
//!   blow-up detection and the regularity/asymptotic diagnostics.
//! * [`experiment`]: presets, configs, sweeps and verification suites behind
//!   the `fracprop` binary.

pub mod calculus;
pub mod error;
#[cfg(feature = "experiment")]
pub mod experiment;
pub mod mittag_leffler;
pub mod solver;
pub mod spectral;
mod par;

pub use par::with_thread_cap;

pub use error::{FracError, Result};
