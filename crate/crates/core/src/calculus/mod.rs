//! Fractional kernels and product-integration quadrature.
//!
//! `I^α u = g_α * u` with `g_α(t) = t^{α-1}/Γ(α)`; the Caputo derivative is
//! `D^α u = g_{1-α} * u'`, i.e. the Riemann-Liouville derivative of
//! `u - u(0)`. All quadratures integrate the singular kernel exactly against
//! the piecewise-linear interpolant of the samples.

mod grid;
mod growth;

use num_complex::Complex64;

pub use grid::TimeGrid;
pub(crate) use grid::power_moment;
pub use growth::{admissibility, Admissibility, GrowthFunction, GrowthKind};

use crate::error::{FracError, Result};
use crate::mittag_leffler::{MittagLeffler, MlConfig};

/// `g_α(t) = t^{α-1}/Γ(α)` for `t > 0`, zero otherwise.
pub fn g_kernel(alpha: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t.powf(alpha - 1.0) / libm::tgamma(alpha)
}

fn check_samples(grid: &TimeGrid, samples: &[Complex64], need: usize) -> Result<()> {
    if grid.len() < need {
        return Err(FracError::TooFewSamples {
            need,
            got: grid.len(),
        });
    }
    if samples.len() != grid.len() {
        return Err(FracError::Shape {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(())
}

/// `I^α u(t_n)` at every node (the first entry is 0).
pub fn rl_integral(alpha: f64, grid: &TimeGrid, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::invalid(format!("rl_integral needs 0 < alpha <= 1, got {alpha}")));
    }
    check_samples(grid, samples, 2)?;
    let inv_gamma = 1.0 / libm::tgamma(alpha);
    let mut out = Vec::with_capacity(grid.len());
    out.push(Complex64::new(0.0, 0.0));
    for n in 1..grid.len() {
        let w = grid.kernel_weights(alpha, n);
        let s: Complex64 = w.iter().zip(samples).map(|(&wj, &u)| u * wj).sum();
        out.push(s * inv_gamma);
    }
    Ok(out)
}

/// Caputo derivative at `t_1, …, t_N` (L1 scheme).
///
/// This is the exact derivative of `g_{1-α} * (u_h - u(0))` with `u_h` the
/// piecewise-linear interpolant, so constants map to zero and linear data is
/// reproduced exactly. There is no value at `t_0`.
pub fn caputo_derivative(
    alpha: f64,
    grid: &TimeGrid,
    samples: &[Complex64],
) -> Result<Vec<Complex64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FracError::invalid(format!("caputo_derivative needs 0 < alpha < 1, got {alpha}")));
    }
    check_samples(grid, samples, 3)?;
    let t = grid.nodes();
    let c = 1.0 / libm::tgamma(1.0 - alpha);
    let slopes: Vec<Complex64> = (0..t.len() - 1)
        .map(|j| (samples[j + 1] - samples[j]) / (t[j + 1] - t[j]))
        .collect();
    let mut out = Vec::with_capacity(t.len() - 1);
    for n in 1..t.len() {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            s += slopes[j] * power_moment(alpha, t[n] - t[j], t[n] - t[j + 1]);
        }
        out.push(s * c);
    }
    Ok(out)
}

/// Fractional Gronwall bound `a(t) E_{α,1}(b Γ(α) t^α)`.
///
/// If `u(t) <= a(t) + b ∫_0^t (t-s)^{α-1} u(s) ds` with `a` nondecreasing,
/// then `u(t)` is below this value.
pub fn gronwall_bound(
    a_fn: impl Fn(f64) -> f64,
    b: f64,
    alpha: f64,
    t: f64,
    cfg: &MlConfig,
) -> Result<f64> {
    if !(b > 0.0) {
        return Err(FracError::invalid(format!("gronwall_bound needs b > 0, got {b}")));
    }
    if !(t >= 0.0) {
        return Err(FracError::invalid(format!("gronwall_bound needs t >= 0, got {t}")));
    }
    let ml = MittagLeffler::new(alpha, 1.0, *cfg)?;
    let z = b * libm::tgamma(alpha) * t.powf(alpha);
    Ok(a_fn(t) * ml.eval(Complex64::new(z, 0.0))?.re)
}
