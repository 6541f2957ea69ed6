//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Everything returns flat `Float64Array`s so the page can plot without
//! any glue beyond the generated module.

use fracprop::calculus::{caputo_derivative, rl_integral, TimeGrid};
use fracprop::mittag_leffler::{rgamma, MittagLeffler, MlConfig};
use fracprop::solver::{solve_linear, DuhamelKernel};
use fracprop::spectral::{DiagonalizedOperator, Propagator, StateField};
use nalgebra::DMatrix;
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn js_err(e: fracprop::FracError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct MlValue {
    pub re: f64,
    pub im: f64,
    branch: String,
}

#[wasm_bindgen]
impl MlValue {
    #[wasm_bindgen(getter)]
    pub fn branch(&self) -> String {
        self.branch.clone()
    }
}

/// E_{α,β}(z) together with the evaluation branch that produced it.
#[wasm_bindgen]
pub fn ml_eval(alpha: f64, beta: f64, re: f64, im: f64) -> Result<MlValue, JsError> {
    let ml = MittagLeffler::new(alpha, beta, MlConfig::default()).map_err(js_err)?;
    let (v, branch) = ml.eval_branch(Complex64::new(re, im)).map_err(js_err)?;
    Ok(MlValue { re: v.re, im: v.im, branch: branch.to_string() })
}

/// Solves the scalar problem D^α u = iλu + i f0 with u(0) = x on [0, T].
/// Returns rows `t, re, im, |u|` flattened.
#[wasm_bindgen]
pub fn scalar_trajectory(
    alpha: f64,
    lambda: f64,
    x_re: f64,
    x_im: f64,
    f0: f64,
    horizon: f64,
    intervals: usize,
) -> Result<Vec<f64>, JsError> {
    scalar_rows(alpha, lambda, Complex64::new(x_re, x_im), f0, horizon, intervals).map_err(js_err)
}

pub fn scalar_rows(alpha: f64, lambda: f64, x: Complex64, f0: f64, horizon: f64, intervals: usize) -> fracprop::Result<Vec<f64>> {
    let cfg = MlConfig::default();
    let op = DiagonalizedOperator::from_hermitian(DMatrix::from_element(1, 1, Complex64::new(lambda, 0.0)))?;
    let prop = Propagator::new(alpha, cfg)?;
    let kernel = DuhamelKernel::new(alpha, cfg)?;
    let grid = TimeGrid::for_alpha(horizon, intervals, alpha)?;
    let v = vec![StateField::new(vec![Complex64::new(f0, 0.0)]); grid.len()];
    let tr = solve_linear(&prop, &kernel, &op, &StateField::new(vec![x]), &v, &grid)?;
    let mut out = Vec::with_capacity(4 * grid.len());
    for (&t, s) in grid.nodes().iter().zip(&tr.states) {
        let u = s.coeffs()[0];
        out.extend([t, u.re, u.im, u.norm()]);
    }
    Ok(out)
}

/// Fractional integral (or Caputo derivative) of t^γ on a graded mesh.
/// Returns rows `t, numeric, exact` flattened.
#[wasm_bindgen]
pub fn frac_power(alpha: f64, gamma: f64, horizon: f64, intervals: usize, derivative: bool) -> Result<Vec<f64>, JsError> {
    frac_rows(alpha, gamma, horizon, intervals, derivative).map_err(js_err)
}

pub fn frac_rows(alpha: f64, gamma: f64, horizon: f64, intervals: usize, derivative: bool) -> fracprop::Result<Vec<f64>> {
    let grid = TimeGrid::graded(horizon, intervals, (2.0 / alpha).max(1.0))?;
    let u: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&t| Complex64::new(if t == 0.0 && gamma == 0.0 { 1.0 } else { t.powf(gamma) }, 0.0))
        .collect();
    // I^α t^γ = Γ(γ+1)/Γ(γ+1+α) t^{γ+α}; the Caputo case flips the sign of α
    let (values, first, order) = if derivative {
        (caputo_derivative(alpha, &grid, &u)?, 1, -alpha)
    } else {
        (rl_integral(alpha, &grid, &u)?, 0, alpha)
    };
    let c = rgamma(gamma + 1.0 + order) / rgamma(gamma + 1.0);
    let mut out = Vec::with_capacity(3 * values.len());
    for (&t, v) in grid.nodes()[first..].iter().zip(&values) {
        out.extend([t, v.re, c * t.powf(gamma + order)]);
    }
    Ok(out)
}
