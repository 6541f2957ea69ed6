use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Real Fourier symbol `P(ξ)` of the dispersive operator `A = P(D)`.
///
/// Sign conventions, after writing each model in the form
/// `i D_t^α u + P(D) u + F(u) = 0`:
///
/// | preset                | `P(ξ)`        | source equation                       |
/// |-----------------------|---------------|---------------------------------------|
/// | `fractional_laplacian`| `|ξ|^{2β}`    | `(-Δ)^β`                              |
/// | `schrodinger`         | `|ξ|²`        | `-Δ`                                  |
/// | `airy`                | `ξ³`          | `D^α u + ∂_x³ u + …`, times `i`       |
/// | `benjamin_ono`        | `ξ|ξ|`        | `D^α u - H ∂_x² u + …`, times `i`     |
///
/// For the Airy case `i ∂_x³` has symbol `i (iξ)³ = ξ³`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum SymbolSpec {
    FractionalLaplacian {
        beta: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    Schrodinger {
        #[serde(default = "one")]
        dim: usize,
    },
    Airy,
    BenjaminOno,
    /// Eigenvalues given directly in FFT mode order, with declared growth `m`.
    Custom { values: Vec<f64>, m: f64 },
}

fn one() -> usize {
    1
}

impl SymbolSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SymbolSpec::FractionalLaplacian { .. } => "fractional_laplacian",
            SymbolSpec::Schrodinger { .. } => "schrodinger",
            SymbolSpec::Airy => "airy",
            SymbolSpec::BenjaminOno => "benjamin_ono",
            SymbolSpec::Custom { .. } => "custom",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            SymbolSpec::FractionalLaplacian { dim, .. } | SymbolSpec::Schrodinger { dim } => dim,
            _ => 1,
        }
    }

    /// Growth exponent `m` with `|P(ξ)| ~ |ξ|^m`.
    pub fn growth(&self) -> f64 {
        match *self {
            SymbolSpec::FractionalLaplacian { beta, .. } => 2.0 * beta,
            SymbolSpec::Schrodinger { .. } => 2.0,
            SymbolSpec::Airy => 3.0,
            SymbolSpec::BenjaminOno => 2.0,
            SymbolSpec::Custom { m, .. } => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolSpec::FractionalLaplacian { beta, .. } if !(*beta > 0.0) => {
                return Err(FracError::invalid(format!("fractional Laplacian needs beta > 0, got {beta}")))
            }
            SymbolSpec::Custom { values, m } => {
                if values.iter().any(|v| !v.is_finite()) || !(*m > 0.0) {
                    return Err(FracError::invalid("custom symbol needs finite values and m > 0"));
                }
            }
            _ => {}
        }
        if !(1..=2).contains(&self.dim()) {
            return Err(FracError::invalid(format!("dimension must be 1 or 2, got {}", self.dim())));
        }
        Ok(())
    }

    /// `P(ξ)` for a wave vector; `None` for tabulated symbols.
    pub fn eval(&self, xi: &[f64]) -> Option<f64> {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        Some(match *self {
            SymbolSpec::FractionalLaplacian { beta, .. } => r2.powf(beta),
            SymbolSpec::Schrodinger { .. } => r2,
            SymbolSpec::Airy => xi[0].powi(3),
            SymbolSpec::BenjaminOno => xi[0] * xi[0].abs(),
            SymbolSpec::Custom { .. } => return None,
        })
    }

    /// Range of `|P(ξ)| / |ξ|^m` over the represented modes with `|ξ| >= xi_large`.
    pub fn growth_ratio_range(&self, wavevectors: &[Vec<f64>], values: &[f64], xi_large: f64) -> (f64, f64) {
        let m = self.growth();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (xi, &p) in wavevectors.iter().zip(values) {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r >= xi_large {
                let q = p.abs() / r.powf(m);
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let fl = SymbolSpec::FractionalLaplacian { beta: 0.5, dim: 1 };
        assert_eq!(fl.eval(&[3.0]), Some(3.0));
        assert_eq!(SymbolSpec::BenjaminOno.eval(&[-2.0]), Some(-4.0));
        assert_eq!(SymbolSpec::Airy.eval(&[-2.0]), Some(-8.0));
        assert_eq!(SymbolSpec::Schrodinger { dim: 2 }.eval(&[1.0, 2.0]), Some(5.0));
    }

    #[test]
    fn serde_tag() {
        let s: SymbolSpec = serde_json::from_str(r#"{"preset":"fractional_laplacian","beta":0.75}"#).unwrap();
        assert_eq!(s, SymbolSpec::FractionalLaplacian { beta: 0.75, dim: 1 });
        assert_eq!(serde_json::to_string(&SymbolSpec::Airy).unwrap(), r#"{"preset":"airy"}"#);
    }
}
