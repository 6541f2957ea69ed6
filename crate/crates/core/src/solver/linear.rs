use num_complex::Complex64;

use super::kernel::{accumulate, DuhamelKernel};
use super::trajectory::{NodeDiagnostics, Status, Trajectory};
use crate::calculus::TimeGrid;
use crate::error::{FracError, Result};
use crate::spectral::{DiagonalizedOperator, Propagator, StateField};

fn check_samples(op: &DiagonalizedOperator, v: &[StateField], grid: &TimeGrid) -> Result<()> {
    if grid.len() < 2 {
        return Err(FracError::TooFewSamples { need: 2, got: grid.len() });
    }
    if v.len() != grid.len() {
        return Err(FracError::Shape { expected: grid.len(), got: v.len() });
    }
    if let Some(f) = v.iter().find(|f| f.len() != op.modes()) {
        return Err(FracError::Shape { expected: op.modes(), got: f.len() });
    }
    Ok(())
}

/// `Gv(t_n)` at every node by product integration; `v` is sampled at the nodes.
pub fn duhamel_g(
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    v: &[StateField],
    grid: &TimeGrid,
) -> Result<Vec<StateField>> {
    check_samples(op, v, grid)?;
    let rows = kernel.rows(grid.nodes(), 1, op.eigenvalues())?;
    let mut out = vec![op.zeros()];
    for (r, row) in rows.iter().enumerate() {
        let mut acc = vec![Complex64::new(0.0, 0.0); op.modes()];
        accumulate(row, v, 0..r + 2, &mut acc);
        out.push(StateField::new(acc));
    }
    Ok(out)
}

/// `u(t_n) = S_{t_n} x + i G F(t_n)` for a forcing sampled at the nodes.
pub fn solve_linear(
    prop: &Propagator,
    kernel: &DuhamelKernel,
    op: &DiagonalizedOperator,
    x: &StateField,
    forcing: &[StateField],
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_samples(op, forcing, grid)?;
    let g = if forcing.iter().all(|f| f.norm() == 0.0) {
        vec![op.zeros(); grid.len()]
    } else {
        duhamel_g(kernel, op, forcing, grid)?
    };
    let mut states = Vec::with_capacity(grid.len());
    let mut diagnostics = Vec::with_capacity(grid.len());
    for (&t, gv) in grid.nodes().iter().zip(&g) {
        let mut u = prop.apply_s(op, t, x)?;
        u.axpy(Complex64::new(0.0, 1.0), gv);
        diagnostics.push(NodeDiagnostics {
            t,
            h_norm: u.norm(),
            graph_norm: op.graph_norm(&u),
            iterations: 0,
            contraction: None,
        });
        states.push(u);
    }
    Ok(Trajectory {
        nodes: grid.nodes().to_vec(),
        states,
        diagnostics,
        status: Status::Completed,
        warnings: Vec::new(),
    })
}
