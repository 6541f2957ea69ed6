use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficients of a state in the diagonalizing basis of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    coeffs: Vec<Complex64>,
}

impl StateField {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        StateField { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        StateField::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Unit coefficient on mode `k`.
    pub fn mode(n: usize, k: usize, value: Complex64) -> Self {
        let mut f = StateField::zeros(n);
        f.coeffs[k] = value;
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// ℓ² norm of the coefficients, equal to the H-norm.
    pub fn norm(&self) -> f64 {
        l2(&self.coeffs)
    }

    /// `‖f‖ + ‖A f‖` for eigenvalues `a`.
    pub fn graph_norm(&self, eigenvalues: &[f64]) -> f64 {
        let af = self
            .coeffs
            .iter()
            .zip(eigenvalues)
            .map(|(c, a)| c.norm_sqr() * a * a)
            .sum::<f64>()
            .sqrt();
        self.norm() + af
    }

    /// Pointwise product with a real multiplier.
    pub fn scaled_by(&self, m: &[f64]) -> StateField {
        StateField::new(self.coeffs.iter().zip(m).map(|(c, a)| c * a).collect())
    }

    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> StateField {
        StateField::new(self.coeffs.iter().enumerate().map(|(k, &c)| f(k, c)).collect())
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &StateField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn distance(&self, other: &StateField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

impl Add for &StateField {
    type Output = StateField;
    fn add(self, rhs: &StateField) -> StateField {
        StateField::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &StateField {
    type Output = StateField;
    fn sub(self, rhs: &StateField) -> StateField {
        StateField::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl Mul<Complex64> for &StateField {
    type Output = StateField;
    fn mul(self, s: Complex64) -> StateField {
        StateField::new(self.coeffs.iter().map(|a| a * s).collect())
    }
}
