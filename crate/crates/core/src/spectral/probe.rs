use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::l2;
use super::operator::{DiagonalizedOperator, Potential};
use super::random::random_fourier_coeffs;
use super::symbol::SymbolSpec;
use crate::error::{FracError, Result};

/// One row of the relative-bound table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub gamma: f64,
    /// Riemann sum of `∫ dξ / (P(ξ)² + γ²)` over the mode set.
    pub integral: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Least-squares slope of `ln integral` against `ln γ`.
    pub slope: f64,
    /// First γ in the list with `c2 < 1`.
    pub gamma_star: Option<f64>,
    /// Fitted constant in `c2(γ) = K ‖q‖ (S(γ)/N)^{1/2}`.
    pub k_fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub side: usize,
    pub length: f64,
    pub samples: usize,
    pub seed: u64,
    pub decay: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { side: 1024, length: 2.0 * std::f64::consts::PI, samples: 32, seed: 7, decay: 1.0 }
    }
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Empirical relative bound `‖(q+V)u‖ ≤ c1 ‖u‖ + c2 ‖Hu‖` with `H = P(D)`.
///
/// `c2` follows the resolvent estimate `‖q (H - iγ)^{-1}‖ ≤ ‖q‖ (S/N)^{1/2}`
/// with `S = Σ 1/(P_k² + γ²)`; a single prefactor `K` is fitted so the bound
/// holds on every random field at every γ. `c1 = ‖V‖_∞ + γ c2`.
pub fn relative_bound_probe(
    symbol: &SymbolSpec,
    potential: &Potential,
    gammas: &[f64],
    settings: &ProbeSettings,
) -> Result<ProbeReport> {
    let dim = symbol.dim() as f64;
    let m = symbol.growth();
    if m <= dim / 2.0 {
        return Err(FracError::GrowthHypothesis { m, half_dim: dim / 2.0 });
    }
    if gammas.len() < 2 || gammas.iter().any(|g| !(*g > 0.0)) || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FracError::invalid("gammas must be positive, increasing, at least two"));
    }
    let op = DiagonalizedOperator::build_diagonal(symbol.clone(), settings.side, settings.length)?;
    let n = op.modes();
    if potential.q.len() != n || potential.v.len() != n {
        return Err(FracError::Shape { expected: n, got: potential.q.len().min(potential.v.len()) });
    }
    let p = op.eigenvalues();
    let dxi = (2.0 * std::f64::consts::PI / settings.length).powf(dim);
    let sums: Vec<f64> = gammas
        .iter()
        .map(|g| p.iter().map(|a| 1.0 / (a * a + g * g)).sum::<f64>())
        .collect();

    // ‖q‖ in the discrete L² sense that matches unitary coefficients: the
    // collocation values are point samples, so ‖q u‖ uses ℓ² of samples.
    let q_l2 = potential.q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v_inf = potential.v.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    let mut k_fit: f64 = 0.0;
    if q_l2 > 0.0 {
        for s in 0..settings.samples {
            let c = random_fourier_coeffs(symbol.dim(), settings.side, settings.length, settings.seed, s as u64, settings.decay);
            let f = super::StateField::new(c);
            let u = op.to_physical(&f);
            let qu: Vec<Complex64> = u.iter().zip(&potential.q).map(|(a, b)| a * b).collect();
            let hu = op.apply_a(&f).norm();
            let un = f.norm();
            for (g, sum) in gammas.iter().zip(&sums) {
                let denom = q_l2 * (sum / n as f64).sqrt() * (hu + g * un);
                k_fit = k_fit.max(l2(&qu) / denom);
            }
        }
    }
    let rows: Vec<ProbeRow> = gammas
        .iter()
        .zip(&sums)
        .map(|(&gamma, &sum)| {
            let c2 = k_fit * q_l2 * (sum / n as f64).sqrt();
            ProbeRow { gamma, integral: dxi * sum, c1: v_inf + gamma * c2, c2 }
        })
        .collect();
    let slope = loglog_slope(gammas, &rows.iter().map(|r| r.integral).collect::<Vec<_>>());
    let gamma_star = rows.iter().find(|r| r.c2 < 1.0).map(|r| r.gamma);
    Ok(ProbeReport { rows, slope, gamma_star, k_fit })
}
