//! Finite selfadjoint operators `A = P(D) + q + V` on a periodic torus and
//! their Mittag-Leffler propagators.
//!
//! Pure symbols are diagonal in the Fourier basis and handled by FFT.
//! With potentials the collocation matrix is diagonalized densely. Both
//! paths expose the same coefficient-space interface through
//! [`DiagonalizedOperator`] and [`StateField`].

mod field;
pub mod io;
mod operator;
mod probe;
mod propagator;
mod random;
mod symbol;

pub use field::StateField;
pub use operator::{frequencies, wavevectors, DiagonalizedOperator, Potential, DENSE_CAP, INJECTIVITY_THRESHOLD};
pub use probe::{loglog_slope, relative_bound_probe, ProbeReport, ProbeRow, ProbeSettings};
pub use propagator::{propagator_p, propagator_s, Propagator};
pub use random::{random_fourier_coeffs, random_field};
pub use symbol::SymbolSpec;
