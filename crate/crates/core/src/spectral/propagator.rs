use num_complex::Complex64;

use super::field::StateField;
use super::operator::DiagonalizedOperator;
use crate::error::{FracError, Result};
use crate::mittag_leffler::{MittagLeffler, MlConfig};
use crate::par;

/// Mittag-Leffler multipliers `S_t = E_{α,1}(iA t^α)` and
/// `P_t = t^{α-1} E_{α,α}(iA t^α)`, with the two evaluators built once.
#[derive(Clone, Debug)]
pub struct Propagator {
    alpha: f64,
    s: MittagLeffler,
    p: MittagLeffler,
}

impl Propagator {
    pub fn new(alpha: f64, cfg: MlConfig) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(FracError::invalid(format!("propagators need 0 < alpha <= 1, got {alpha}")));
        }
        Ok(Propagator {
            alpha,
            s: MittagLeffler::new(alpha, 1.0, cfg)?,
            p: MittagLeffler::new(alpha, alpha, cfg)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s_multiplier(&self, a: f64, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(FracError::invalid(format!("S_t needs t >= 0, got {t}")));
        }
        self.s.eval(Complex64::new(0.0, a * t.powf(self.alpha)))
    }

    pub fn p_multiplier(&self, a: f64, t: f64) -> Result<Complex64> {
        if !(t > 0.0) {
            return Err(FracError::invalid(format!("P_t needs t > 0, got {t}")));
        }
        let ta = t.powf(self.alpha);
        Ok(self.p.eval(Complex64::new(0.0, a * ta))? * (ta / t))
    }

    pub fn s_multipliers(&self, eigenvalues: &[f64], t: f64) -> Result<Vec<Complex64>> {
        par::try_map(eigenvalues.len(), |k| {
            self.s_multiplier(eigenvalues[k], t).map_err(|e| e.at_mode(k))
        })
    }

    pub fn p_multipliers(&self, eigenvalues: &[f64], t: f64) -> Result<Vec<Complex64>> {
        par::try_map(eigenvalues.len(), |k| {
            self.p_multiplier(eigenvalues[k], t).map_err(|e| e.at_mode(k))
        })
    }

    pub fn apply_s(&self, op: &DiagonalizedOperator, t: f64, f: &StateField) -> Result<StateField> {
        Ok(op.apply_multiplier(f, &self.s_multipliers(op.eigenvalues(), t)?))
    }

    pub fn apply_p(&self, op: &DiagonalizedOperator, t: f64, f: &StateField) -> Result<StateField> {
        Ok(op.apply_multiplier(f, &self.p_multipliers(op.eigenvalues(), t)?))
    }
}

/// One-shot `S_t f`.
pub fn propagator_s(op: &DiagonalizedOperator, alpha: f64, t: f64, f: &StateField, cfg: &MlConfig) -> Result<StateField> {
    Propagator::new(alpha, *cfg)?.apply_s(op, t, f)
}

/// One-shot `P_t f`.
pub fn propagator_p(op: &DiagonalizedOperator, alpha: f64, t: f64, f: &StateField, cfg: &MlConfig) -> Result<StateField> {
    Propagator::new(alpha, *cfg)?.apply_p(op, t, f)
}
