use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{GrowthFunction, GrowthKind};
use crate::error::{FracError, Result};
use crate::spectral::{DiagonalizedOperator, StateField};

/// Nonlinear term `F(u)` of `i D^α u + A u + F(u) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Zero,
    /// `κ u`.
    Linear { kappa: f64 },
    /// `(λ + iλ_im) |u|^{p-1} u`. With `λ = 0, λ_im < 0` the scalar ODE
    /// `D^α u = -λ_im |u|^{p-1} u` grows for real data.
    Power {
        lambda: f64,
        #[serde(default)]
        lambda_im: f64,
        p: f64,
    },
    /// `i c ∂_x(u^{m+1})/(m+1)`: the gKdV / mBO flux `c u^m u_x` after
    /// multiplying the equation by `i`. Pseudospectral with 2/3 dealiasing.
    Flux {
        m: u32,
        #[serde(default = "one")]
        coefficient: f64,
    },
    /// `λ u / (1 + |u|²)`, bounded.
    Saturating { lambda: f64 },
}

fn one() -> f64 {
    1.0
}

impl NonlinearitySpec {
    pub fn name(&self) -> &'static str {
        match self {
            NonlinearitySpec::Zero => "zero",
            NonlinearitySpec::Linear { .. } => "linear",
            NonlinearitySpec::Power { .. } => "power",
            NonlinearitySpec::Flux { .. } => "flux",
            NonlinearitySpec::Saturating { .. } => "saturating",
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            NonlinearitySpec::Zero => true,
            NonlinearitySpec::Linear { kappa } => kappa == 0.0,
            NonlinearitySpec::Power { lambda, lambda_im, .. } => lambda == 0.0 && lambda_im == 0.0,
            NonlinearitySpec::Flux { coefficient, .. } => coefficient == 0.0,
            NonlinearitySpec::Saturating { lambda } => lambda == 0.0,
        }
    }

    pub fn validate(&self, op: &DiagonalizedOperator) -> Result<()> {
        match *self {
            NonlinearitySpec::Power { p, .. } if !(p >= 1.0) => {
                Err(FracError::invalid(format!("power nonlinearity needs p >= 1, got {p}")))
            }
            NonlinearitySpec::Flux { .. } if op.is_dense() || op.dim() != 1 => Err(FracError::invalid(
                "flux nonlinearity needs a one-dimensional Fourier-diagonal operator",
            )),
            _ => Ok(()),
        }
    }

    /// Growth exponent `p` in `‖F(u)‖ ≲ ‖u‖^p` (1 for bounded or linear terms).
    pub fn growth_exponent(&self) -> f64 {
        match *self {
            NonlinearitySpec::Power { p, .. } => p,
            NonlinearitySpec::Flux { m, .. } => m as f64 + 1.0,
            _ => 1.0,
        }
    }

    /// Growth function `w` with `‖F(u)‖_{D(A)} ≤ C w(‖u‖_{D(A)})`; `None`
    /// when `F` vanishes identically.
    pub fn growth(&self) -> Option<GrowthFunction> {
        if self.is_zero() {
            return None;
        }
        let kind = match *self {
            NonlinearitySpec::Linear { kappa } => GrowthKind::Power { exponent: 1.0, scale: kappa.abs() },
            NonlinearitySpec::Power { lambda, lambda_im, p } => GrowthKind::Power {
                exponent: p,
                scale: lambda.hypot(lambda_im),
            },
            NonlinearitySpec::Flux { m, coefficient } => GrowthKind::Power {
                exponent: m as f64 + 1.0,
                scale: coefficient.abs(),
            },
            NonlinearitySpec::Saturating { lambda } => GrowthKind::Saturating { scale: lambda.abs() },
            NonlinearitySpec::Zero => unreachable!(),
        };
        Some(GrowthFunction::from_kind(kind).expect("positive scale"))
    }

    /// Closed-form Lipschitz bound on the `D(A)`-ball of radius `r`, built
    /// from the sup-norm embedding `‖u‖_∞ ≤ C_e ‖u‖_{D(A)}`. Advisory only.
    pub fn lipschitz(&self, op: &DiagonalizedOperator, r: f64) -> f64 {
        let ce = embedding_constant(op);
        match *self {
            NonlinearitySpec::Zero => 0.0,
            NonlinearitySpec::Linear { kappa } => kappa.abs(),
            NonlinearitySpec::Power { lambda, lambda_im, p } => lambda.hypot(lambda_im) * p * (ce * r).powf(p - 1.0),
            NonlinearitySpec::Flux { m, coefficient } => {
                let kmax = op
                    .wavevectors()
                    .map_or(0.0, |w| w.iter().fold(0.0f64, |a, x| a.max(x[0].abs())));
                coefficient.abs() * kmax * (ce * r).powi(m as i32)
            }
            NonlinearitySpec::Saturating { lambda } => 1.125 * lambda.abs(),
        }
    }

    pub fn eval(&self, op: &DiagonalizedOperator, u: &StateField) -> Result<StateField> {
        if self.is_zero() {
            return Ok(op.zeros());
        }
        match *self {
            NonlinearitySpec::Linear { kappa } => return Ok(u * Complex64::new(kappa, 0.0)),
            NonlinearitySpec::Flux { m, coefficient } => return flux(op, u, m, coefficient),
            _ => {}
        }
        let (down, up) = cell_scales(op);
        let phys: Vec<Complex64> = op.to_physical(u).into_iter().map(|z| z * down).collect();
        let out: Vec<Complex64> = match *self {
            NonlinearitySpec::Power { lambda, lambda_im, p } => {
                let c = Complex64::new(lambda, lambda_im);
                phys.iter().map(|&z| c * z * z.norm().powf(p - 1.0)).collect()
            }
            NonlinearitySpec::Saturating { lambda } => {
                phys.iter().map(|&z| z * (lambda / (1.0 + z.norm_sqr()))).collect()
            }
            _ => unreachable!(),
        };
        op.from_physical(&out.into_iter().map(|z| z * up).collect::<Vec<_>>())
    }
}

/// `sqrt(Σ (1+|a_k|)^{-2} / N)`.
/// Factors taking unitary physical values to point values and back.
fn cell_scales(op: &DiagonalizedOperator) -> (f64, f64) {
    let h = op.cell_volume().sqrt();
    (1.0 / h, h)
}

fn embedding_constant(op: &DiagonalizedOperator) -> f64 {
    let n = op.modes() as f64;
    let s: f64 = op.eigenvalues().iter().map(|a| (1.0 + a.abs()).powi(-2)).sum();
    let s = s / op.cell_volume();
    if op.is_dense() {
        s.sqrt()
    } else {
        (s / n).sqrt()
    }
}

fn flux(op: &DiagonalizedOperator, u: &StateField, m: u32, c: f64) -> Result<StateField> {
    let dx = op
        .derivative_multiplier()
        .ok_or_else(|| FracError::invalid("flux nonlinearity needs the Fourier path"))?;
    let side = op.side();
    let (down, up) = cell_scales(op);
    let scale = c / (m as f64 + 1.0) * up;
    let pw: Vec<Complex64> = op.to_physical(u).iter().map(|z| (z * down).powu(m + 1) * scale).collect();
    let w = op.from_physical(&pw)?;
    let cutoff = side / 3;
    Ok(w.map(|k, v| {
        let s = if k < side / 2 { k } else { side - k };
        if s > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            // i ∂_x ↦ i (iξ) = -ξ
            Complex64::new(0.0, 1.0) * dx[k] * v
        }
    }))
}
