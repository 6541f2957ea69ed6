//! Mild solutions `u(t) = S_t x + i G F(u)(t)` of `i D^α u + A u + F(u) = 0`.
//!
//! With `D^α u = iAu + iF` the Duhamel operator is
//! `Gv(t) = ∫_0^t P_{t-τ} v(τ) dτ`, discretized by product integration
//! against the exact kernel moments ([`DuhamelKernel`]). Nonlinear problems
//! are solved by global Picard iteration on a window ([`solve_local`]) and
//! extended window by window ([`solve_with_continuation`]).

mod asymptotics;
mod diagnostics;
mod kernel;
mod linear;
mod nonlinearity;
mod picard;
mod trajectory;

pub use asymptotics::{stiff_limit, steady_state, vanishing_operator, AsymptoticMode, AsymptoticRow, AsymptoticTable, Forcing};
pub use diagnostics::{
    classify_global, holder_slope, perturbed_distance_bound, DistanceCheck, GlobalClassification, GlobalRegime, HolderCase,
    HolderFit, EPS_SWEEP,
};
pub use kernel::DuhamelKernel;
pub use linear::{duhamel_g, solve_linear};
pub use nonlinearity::NonlinearitySpec;
pub use picard::{
    solve_local, solve_with_continuation, ContinuationSettings, MildSolver, PicardSettings, StepPolicy, WindowOutcome,
};
pub use trajectory::{NodeDiagnostics, Status, Trajectory};
