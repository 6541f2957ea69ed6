use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::DuhamelKernel;
use super::linear::solve_linear;
use super::trajectory::Trajectory;
use crate::calculus::{rl_integral, TimeGrid};
use crate::error::{FracError, Result};
use crate::spectral::{loglog_slope, DiagonalizedOperator, Propagator, StateField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticMode {
    SteadyState,
    VanishingOperator,
    StiffLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub parameter: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTable {
    pub mode: AsymptoticMode,
    pub rows: Vec<AsymptoticRow>,
    /// Log-log slope of error against parameter.
    pub slope: f64,
    /// Solution for the last parameter in the table.
    #[serde(skip)]
    pub last: Option<Trajectory>,
}

impl AsymptoticTable {
    fn new(mode: AsymptoticMode, rows: Vec<AsymptoticRow>, last: Option<Trajectory>) -> Self {
        let p: Vec<f64> = rows.iter().map(|r| r.parameter).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let slope = if e.iter().all(|&x| x > 0.0) { loglog_slope(&p, &e) } else { f64::NAN };
        AsymptoticTable { mode, rows, slope, last }
    }

    /// True when the error column decreases as the experiment approaches its limit.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// Time-dependent forcing `t ↦ F(t)` in the operator's basis.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> StateField + Sync);

fn sample(f: Forcing, grid: &TimeGrid, scale: f64) -> Vec<StateField> {
    grid.nodes().iter().map(|&t| &f(t) * Complex64::new(scale, 0.0)).collect()
}

/// Constant forcing `F0` on growing horizons; error `‖u(T) + A^{-1} F0‖_H`.
pub fn steady_state(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    f0: &StateField,
    horizons: &[f64],
    intervals: usize,
) -> Result<AsymptoticTable> {
    let target = &op.apply_inverse(f0)? * Complex64::new(-1.0, 0.0);
    let mut rows = Vec::new();
    let mut last = None;
    for &t in horizons {
        let grid = TimeGrid::for_alpha(t, intervals, prop.alpha())?;
        let traj = solve_linear(prop, kernel, op, x, &vec![f0.clone(); grid.len()], &grid)?;
        rows.push(AsymptoticRow { parameter: t, error: traj.last().distance(&target) });
        last = Some(traj);
    }
    Ok(AsymptoticTable::new(AsymptoticMode::SteadyState, rows, last))
}

/// `i D^α u + ε A u + F = 0` for decreasing ε; error is the sup over nodes
/// of `‖u_ε(t) - x - i I^α F(t)‖_H`.
pub fn vanishing_operator(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    forcing: Forcing,
    epsilons: &[f64],
    grid: &TimeGrid,
) -> Result<AsymptoticTable> {
    let v = sample(forcing, grid, 1.0);
    let alpha = prop.alpha();
    // x + i I^α F, mode by mode
    let mut limit: Vec<StateField> = vec![x.clone(); grid.len()];
    for k in 0..op.modes() {
        let series: Vec<Complex64> = v.iter().map(|s| s.coeffs()[k]).collect();
        let int = rl_integral(alpha, grid, &series)?;
        for (l, i) in limit.iter_mut().zip(int) {
            l.coeffs_mut()[k] += Complex64::new(0.0, 1.0) * i;
        }
    }
    let mut rows = Vec::new();
    let mut last = None;
    for &eps in epsilons {
        let scaled = op.scaled(eps);
        let traj = solve_linear(prop, kernel, &scaled, x, &v, grid)?;
        let err = traj.states.iter().zip(&limit).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
        rows.push(AsymptoticRow { parameter: eps, error: err });
        last = Some(traj);
    }
    Ok(AsymptoticTable::new(AsymptoticMode::VanishingOperator, rows, last))
}

/// `i ε D^α u + A u + F = 0` for decreasing ε; error is the sup over nodes in
/// `[δ, T]` of `‖u_ε(t) + A^{-1} F(t)‖_H`.
#[allow(clippy::too_many_arguments)]
pub fn stiff_limit(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    forcing: Forcing,
    epsilons: &[f64],
    grid: &TimeGrid,
    delta: f64,
) -> Result<AsymptoticTable> {
    if !op.is_injective() {
        return Err(FracError::NotInjective { min_abs: op.min_abs_eigenvalue() });
    }
    let targets: Vec<StateField> = grid
        .nodes()
        .iter()
        .map(|&t| op.apply_inverse(&forcing(t)).map(|s| &s * Complex64::new(-1.0, 0.0)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut last = None;
    for &eps in epsilons {
        let scaled = op.scaled(1.0 / eps);
        let v = sample(forcing, grid, 1.0 / eps);
        let traj = solve_linear(prop, kernel, &scaled, x, &v, grid)?;
        let err = traj
            .nodes
            .iter()
            .zip(traj.states.iter().zip(&targets))
            .filter(|(t, _)| **t >= delta)
            .map(|(_, (a, b))| a.distance(b))
            .fold(0.0, f64::max);
        rows.push(AsymptoticRow { parameter: eps, error: err });
        last = Some(traj);
    }
    Ok(AsymptoticTable::new(AsymptoticMode::StiffLimit, rows, last))
}
