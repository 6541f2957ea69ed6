use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{accumulate, DuhamelKernel, IntervalCache};
use super::nonlinearity::NonlinearitySpec;
use super::trajectory::{NodeDiagnostics, Status, Trajectory};
use crate::calculus::TimeGrid;
use crate::error::{FracError, Result};
use crate::spectral::{DiagonalizedOperator, Propagator, StateField};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardSettings {
    /// Stop when the sup-node `D(A)` distance between iterates is below
    /// `tol * max(1, sup ‖u‖_{D(A)})`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowOutcome {
    Converged { iterations: usize, factor: Option<f64> },
    Failed { iterations: usize, factor: f64 },
}

/// Mild-solution integrator `u = S_t x + i G F(u)` that grows a time mesh
/// window by window while keeping the full memory of the Duhamel term.
pub struct MildSolver<'a> {
    op: &'a DiagonalizedOperator,
    prop: &'a Propagator,
    kernel: &'a DuhamelKernel,
    f: &'a NonlinearitySpec,
    x: StateField,
    nodes: Vec<f64>,
    states: Vec<StateField>,
    forcing: Vec<StateField>,
    diagnostics: Vec<NodeDiagnostics>,
    warnings: Vec<String>,
    cache: IntervalCache,
    cache_from: Option<usize>,
}

/// Cached interval moments allowed per solver, counted in `(interval, mode)` pairs.
const CACHE_LIMIT: usize = 1 << 22;

impl<'a> MildSolver<'a> {
    pub fn new(
        op: &'a DiagonalizedOperator,
        prop: &'a Propagator,
        kernel: &'a DuhamelKernel,
        f: &'a NonlinearitySpec,
        x: StateField,
    ) -> Result<Self> {
        if x.len() != op.modes() {
            return Err(FracError::Shape { expected: op.modes(), got: x.len() });
        }
        if prop.alpha() != kernel.alpha() {
            return Err(FracError::invalid("propagator and kernel use different alpha"));
        }
        f.validate(op)?;
        let f0 = f.eval(op, &op.zeros())?;
        if f0.norm() > 0.0 {
            return Err(FracError::invalid(format!("nonlinearity must satisfy F(0) = 0, got ‖F(0)‖ = {}", f0.norm())));
        }
        let v0 = f.eval(op, &x)?;
        let diag = NodeDiagnostics {
            t: 0.0,
            h_norm: x.norm(),
            graph_norm: op.graph_norm(&x),
            iterations: 0,
            contraction: None,
        };
        Ok(MildSolver {
            op,
            prop,
            kernel,
            f,
            x: x.clone(),
            nodes: vec![0.0],
            states: vec![x],
            forcing: vec![v0],
            diagnostics: vec![diag],
            warnings: Vec::new(),
            cache: IntervalCache::new(CACHE_LIMIT),
            cache_from: None,
        })
    }

    pub fn t(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of stored nodes, including `t = 0`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn last(&self) -> &StateField {
        self.states.last().unwrap()
    }

    /// Declares that intervals from the current end on lie on a lattice
    /// with exactly repeating spacings, so their kernel moments are cached.
    pub fn cache_from_here(&mut self) {
        self.cache_from = Some(self.nodes.len() - 1);
    }

    pub fn warn(&mut self, msg: String) {
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Extends the solution to the given increasing nodes (all beyond the
    /// current end). Nothing is stored unless the Picard iteration converges.
    pub fn advance(&mut self, new: &[f64], picard: &PicardSettings) -> Result<WindowOutcome> {
        if new.is_empty() {
            return Ok(WindowOutcome::Converged { iterations: 0, factor: None });
        }
        if new[0] <= self.t() || new.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FracError::Grid("window nodes must increase beyond the current end".into()));
        }
        let modes = self.op.modes();
        let start = self.nodes.len();
        let m = new.len();
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(new);
        let rows = match self.cache_from {
            Some(cf) => self.kernel.rows_cached(&nodes, start, self.op.eigenvalues(), &mut self.cache, cf)?,
            None => self.kernel.rows(&nodes, start, self.op.eigenvalues())?,
        };

        let mut base = Vec::with_capacity(m);
        for (r, row) in rows.iter().enumerate() {
            let mut b = self.prop.apply_s(self.op, nodes[start + r], &self.x)?;
            let mut hist = vec![Complex64::new(0.0, 0.0); modes];
            accumulate(row, &self.forcing, 0..start, &mut hist);
            b.axpy(I, &StateField::new(hist));
            base.push(b);
        }

        let sweep = |v: &[StateField]| -> Vec<StateField> {
            rows.iter()
                .enumerate()
                .map(|(r, row)| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); modes];
                    for (j, vj) in v.iter().enumerate().take(r + 1) {
                        let w = &row[(start + j) * modes..(start + j + 1) * modes];
                        for ((a, w), c) in acc.iter_mut().zip(w).zip(vj.coeffs()) {
                            *a += w * c;
                        }
                    }
                    let mut u = base[r].clone();
                    u.axpy(I, &StateField::new(acc));
                    u
                })
                .collect()
        };

        let (u, iterations, factor) = if self.f.is_zero() {
            (base.clone(), 1, None)
        } else {
            let mut u = vec![self.last().clone(); m];
            let mut factors: Vec<f64> = Vec::new();
            let mut prev: Option<f64> = None;
            let mut done = None;
            for it in 1..=picard.max_iter {
                let v = u.iter().map(|s| self.f.eval(self.op, s)).collect::<Result<Vec<_>>>()?;
                let next = sweep(&v);
                let d = next
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| self.op.graph_norm(&(a - b)))
                    .fold(0.0, f64::max);
                let scale = next.iter().map(|s| self.op.graph_norm(s)).fold(1.0, f64::max);
                u = next;
                if !(d.is_finite() && scale.is_finite()) {
                    return Ok(WindowOutcome::Failed { iterations: it, factor: f64::INFINITY });
                }
                if let Some(p) = prev {
                    factors.push(if p > 0.0 { d / p } else { 0.0 });
                }
                let recent_ok = factors.iter().rev().take(2).all(|&q| q < 1.0);
                if d <= picard.tol * scale && recent_ok {
                    done = Some((it, factors.last().copied()));
                    break;
                }
                if factors.len() >= 2 && factors.iter().rev().take(2).all(|&q| q >= 1.0) {
                    return Ok(WindowOutcome::Failed { iterations: it, factor: *factors.last().unwrap() });
                }
                prev = Some(d);
            }
            match done {
                Some((it, f)) => (u, it, f),
                None => {
                    let factor = factors.last().copied().unwrap_or(f64::NAN);
                    return Ok(WindowOutcome::Failed { iterations: picard.max_iter, factor });
                }
            }
        };

        for (r, s) in u.into_iter().enumerate() {
            self.diagnostics.push(NodeDiagnostics {
                t: new[r],
                h_norm: s.norm(),
                graph_norm: self.op.graph_norm(&s),
                iterations,
                contraction: factor,
            });
            self.forcing.push(self.f.eval(self.op, &s)?);
            self.states.push(s);
        }
        self.nodes.extend_from_slice(new);
        Ok(WindowOutcome::Converged { iterations, factor })
    }

    pub fn finish(self, status: Status) -> Trajectory {
        Trajectory {
            nodes: self.nodes,
            states: self.states,
            diagnostics: self.diagnostics,
            status,
            warnings: self.warnings,
        }
    }
}

fn contraction_warning(f: &NonlinearitySpec, op: &DiagonalizedOperator, x: &StateField, alpha: f64, t: f64) -> Option<String> {
    let r = op.graph_norm(x).max(1.0);
    let l = f.lipschitz(op, 2.0 * r);
    let q = l * t.powf(alpha) / libm::tgamma(1.0 + alpha);
    (q >= 1.0).then(|| {
        format!("Lipschitz estimate {l:.3e} on the ball of radius {:.3e} gives C T^α/Γ(1+α) = {q:.3e} >= 1 for T = {t:.3e}", 2.0 * r)
    })
}

/// One Picard solve on the whole grid, starting from `u ≡ x`.
pub fn solve_local(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    f: &NonlinearitySpec,
    grid: &TimeGrid,
    picard: &PicardSettings,
) -> Result<Trajectory> {
    let mut solver = MildSolver::new(op, prop, kernel, f, x.clone())?;
    if let Some(w) = contraction_warning(f, op, x, prop.alpha(), grid.t_end()) {
        solver.warn(w);
    }
    let status = match solver.advance(&grid.nodes()[1..], picard)? {
        WindowOutcome::Converged { .. } => Status::Completed,
        WindowOutcome::Failed { iterations, factor } => Status::ToleranceFailure { factor, iterations, t: 0.0 },
    };
    Ok(solver.finish(status))
}

/// Window length `c (1 + ‖u‖_{D(A)})^{-e}`; `e` defaults to `(p-1)/α` for a
/// nonlinearity of growth `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepPolicy {
    pub c: f64,
    pub exponent: Option<f64>,
    pub max_window: f64,
    pub floor: f64,
    pub max_halvings: usize,
    /// Graded intervals in the first window.
    pub first_intervals: usize,
    /// Uniform intervals in every later window.
    pub window_intervals: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            c: 0.125,
            exponent: None,
            max_window: 1.0,
            floor: 1e-8,
            max_halvings: 3,
            first_intervals: 16,
            window_intervals: 8,
        }
    }
}

impl StepPolicy {
    pub fn exponent_for(&self, f: &NonlinearitySpec, alpha: f64) -> f64 {
        self.exponent.unwrap_or((f.growth_exponent() - 1.0) / alpha)
    }

    pub fn window(&self, norm: f64, exponent: f64) -> f64 {
        (self.c * (1.0 + norm).powf(-exponent)).min(self.max_window)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationSettings {
    pub blowup_threshold: f64,
    pub policy: StepPolicy,
    pub picard: PicardSettings,
    /// Node budget. The Duhamel memory makes the cost quadratic in the node
    /// count, so a run that needs more nodes stops with `tolerance_failure`.
    pub max_nodes: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            blowup_threshold: 1e6,
            policy: StepPolicy::default(),
            picard: PicardSettings::default(),
            max_nodes: 10_000,
        }
    }
}

fn dyadic_floor(h: f64) -> f64 {
    if h > 0.0 && h.is_finite() {
        2f64.powi(h.log2().floor() as i32)
    } else {
        h
    }
}

fn window_nodes(t0: f64, h: f64, first: bool, policy: &StepPolicy, alpha: f64) -> Vec<f64> {
    if first {
        let g = TimeGrid::for_alpha(h, policy.first_intervals.max(1), alpha).expect("positive window");
        g.nodes()[1..].to_vec()
    } else {
        let n = policy.window_intervals.max(1);
        (1..=n).map(|j| if j == n { t0 + h } else { t0 + h * j as f64 / n as f64 }).collect()
    }
}

/// Repeated local solves up to `horizon`, shrinking windows as the norm
/// grows. Reports `blow_up` only when the window collapses below the floor
/// while `‖u‖_{D(A)}` exceeds the threshold.
pub fn solve_with_continuation(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    f: &NonlinearitySpec,
    horizon: f64,
    settings: &ContinuationSettings,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FracError::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let alpha = prop.alpha();
    let policy = &settings.policy;
    let e = policy.exponent_for(f, alpha);
    let mut solver = MildSolver::new(op, prop, kernel, f, x.clone())?;
    if let Some(w) = contraction_warning(f, op, x, alpha, policy.window(op.graph_norm(x), e)) {
        solver.warn(w);
    }
    loop {
        let t = solver.t();
        let remaining = horizon - t;
        if remaining <= 1e-12 * horizon {
            return Ok(solver.finish(Status::Completed));
        }
        if solver.len() > settings.max_nodes {
            solver.warn(format!("node budget of {} exhausted at t = {t:e}", settings.max_nodes));
            return Ok(solver.finish(Status::ToleranceFailure { factor: f64::NAN, iterations: 0, t }));
        }
        let norm = op.graph_norm(solver.last());
        let above = norm > settings.blowup_threshold;
        // power-of-two windows keep later nodes on a dyadic lattice
        let mut h = dyadic_floor(policy.window(norm, e));
        // absorb a sliver at the end instead of leaving a tiny last window
        if h >= 0.75 * remaining {
            h = remaining;
        }
        let mut halvings = 0;
        loop {
            if h < policy.floor {
                let status = if above {
                    Status::BlowUp { t_est: t }
                } else {
                    Status::ToleranceFailure { factor: f64::NAN, iterations: 0, t }
                };
                return Ok(solver.finish(status));
            }
            let nodes = window_nodes(t, h, t == 0.0, policy, alpha);
            match solver.advance(&nodes, &settings.picard)? {
                WindowOutcome::Converged { .. } => {
                    if t == 0.0 {
                        solver.cache_from_here();
                    }
                    break;
                }
                WindowOutcome::Failed { iterations, factor } => {
                    if !above {
                        halvings += 1;
                        if halvings > policy.max_halvings {
                            return Ok(solver.finish(Status::ToleranceFailure { factor, iterations, t }));
                        }
                    }
                    h *= 0.5;
                }
            }
        }
    }
}
