use std::fmt;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Built-in growth profiles; `Custom` wraps an arbitrary closure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthKind {
    /// `w(σ) = c σ^p`.
    Power { exponent: f64, scale: f64 },
    /// `w(σ) = c σ / (1 + σ)`, bounded.
    Saturating { scale: f64 },
    /// `w(σ) = σ ln(1 + σ)`.
    SigmaLog,
    Custom { name: String },
}

/// Continuous, nondecreasing, nonnegative `w` with `w(0) = 0`.
#[derive(Clone)]
pub struct GrowthFunction {
    kind: GrowthKind,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    monotone: bool,
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthFunction")
            .field("kind", &self.kind)
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl GrowthFunction {
    pub fn from_kind(kind: GrowthKind) -> Result<Self> {
        let eval: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match kind {
            GrowthKind::Power { exponent, scale } => {
                if !(exponent > 0.0 && scale > 0.0) {
                    return Err(FracError::Growth("power growth needs positive exponent and scale".into()));
                }
                Arc::new(move |s: f64| scale * s.powf(exponent))
            }
            GrowthKind::Saturating { scale } => {
                if !(scale > 0.0) {
                    return Err(FracError::Growth("saturating growth needs a positive scale".into()));
                }
                Arc::new(move |s: f64| scale * s / (1.0 + s))
            }
            GrowthKind::SigmaLog => Arc::new(|s: f64| s * s.ln_1p()),
            GrowthKind::Custom { .. } => {
                return Err(FracError::Growth("custom growth needs GrowthFunction::custom".into()))
            }
        };
        Ok(GrowthFunction {
            kind,
            eval,
            monotone: true,
        })
    }

    pub fn power(exponent: f64) -> Self {
        Self::from_kind(GrowthKind::Power { exponent, scale: 1.0 }).expect("positive exponent")
    }

    pub fn saturating() -> Self {
        Self::from_kind(GrowthKind::Saturating { scale: 1.0 }).unwrap()
    }

    pub fn sigma_log() -> Self {
        Self::from_kind(GrowthKind::SigmaLog).unwrap()
    }

    pub fn custom(
        name: impl Into<String>,
        monotone: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        GrowthFunction {
            kind: GrowthKind::Custom { name: name.into() },
            eval: Arc::new(f),
            monotone,
        }
    }

    pub fn kind(&self) -> &GrowthKind {
        &self.kind
    }

    pub fn declared_monotone(&self) -> bool {
        self.monotone
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        (self.eval)(sigma)
    }

    /// Checks `w(0) = 0`, positivity and (if declared) monotonicity on a
    /// logarithmic sample of `(0, sigma_max]`.
    pub fn validate(&self, sigma_max: f64) -> Result<()> {
        let w0 = self.eval(0.0);
        if w0 != 0.0 {
            return Err(FracError::Growth(format!("w(0) = {w0}, expected 0")));
        }
        let mut prev = 0.0;
        let samples = 400;
        let (lo, hi) = ((1e-6f64).ln(), sigma_max.ln());
        for i in 0..=samples {
            let s = (lo + (hi - lo) * i as f64 / samples as f64).exp();
            let w = self.eval(s);
            if !(w > 0.0 && w.is_finite()) {
                return Err(FracError::Growth(format!("w({s}) = {w} must be positive")));
            }
            if self.monotone && w < prev * (1.0 - 1e-12) {
                return Err(FracError::Growth(format!("w decreases near sigma = {s}")));
            }
            prev = w;
        }
        Ok(())
    }
}

/// Outcome of the `C_q` integral test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Admissibility {
    /// Integral converges; `value` includes a geometric tail estimate.
    Finite { value: f64, partial: f64, growth: f64 },
    /// Partial integrals keep growing: `w` is in `C_∞`.
    Divergent { partial: f64, growth: f64 },
}

impl Admissibility {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Admissibility::Divergent { .. })
    }

    /// Partial integral up to `4 sigma_max`; monotone in `w`.
    pub fn partial(&self) -> f64 {
        match *self {
            Admissibility::Finite { partial, .. } | Admissibility::Divergent { partial, .. } => partial,
        }
    }
}

/// Log of `∫_{e^{s0}}^{e^{s1}} σ^{e-1} w(σ)^{-e} dσ`, integrating in `s = ln σ`.
fn log_integral(w: &GrowthFunction, e: f64, s0: f64, s1: f64, rule: &GaussLegendre) -> Result<f64> {
    let panels = ((s1 - s0) / 0.25).ceil().max(1.0) as usize;
    let h = (s1 - s0) / panels as f64;
    let mut terms = Vec::with_capacity(panels * 16);
    for k in 0..panels {
        let a = s0 + k as f64 * h;
        for &(x, wt) in rule.as_node_weight_pairs() {
            let s = a + 0.5 * h * (x + 1.0);
            let sigma = s.exp();
            let wv = w.eval(sigma);
            if !(wv > 0.0) {
                return Err(FracError::Growth(format!(
                    "w({sigma}) = {wv}; the admissibility integral needs w > 0 on [1, ∞)"
                )));
            }
            // σ^{e-1} w^{-e} dσ = σ^e w^{-e} ds
            terms.push((0.5 * h * wt).ln() + e * (s - wv.ln()));
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln())
}

/// Classifies `∫_1^∞ σ^{1/α+ε-1} / w(σ)^{1/α+ε} dσ`.
///
/// Divergent when the partial integral still grows by a relative amount of
/// at least `0.25 ln 4 / ln(4 S)` between `S = sigma_max` and `4S`: a
/// logarithmically divergent integrand gives `ln 4 / ln S`, while a
/// convergent power tail gives `O(S^{-c})`. For finite integrals the value
/// adds the geometric tail fitted to the increments on `[S, 4S]`, `[4S, 16S]`.
pub fn admissibility(w: &GrowthFunction, alpha: f64, eps: f64, sigma_max: f64) -> Result<Admissibility> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FracError::invalid(format!("admissibility needs 0 < alpha < 1, got {alpha}")));
    }
    if !(eps > 0.0) {
        return Err(FracError::invalid("admissibility needs eps > 0"));
    }
    if !(sigma_max >= 10.0) {
        return Err(FracError::invalid("admissibility needs sigma_max >= 10"));
    }
    let e = 1.0 / alpha + eps;
    let rule = GaussLegendre::new(16).expect("16-point rule");
    let ls = sigma_max.ln();
    let l4 = 4f64.ln();
    let i1 = log_integral(w, e, 0.0, ls, &rule)?;
    let d1 = log_integral(w, e, ls, ls + l4, &rule)?;
    let d2 = log_integral(w, e, ls + l4, ls + 2.0 * l4, &rule)?;
    let log_add = |a: f64, b: f64| {
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    };
    let i4 = log_add(i1, d1);
    let growth = (d1 - i1).exp();
    let threshold = 0.25 * l4 / (4.0 * sigma_max).ln();
    if growth >= threshold {
        return Ok(Admissibility::Divergent {
            partial: i4.exp(),
            growth,
        });
    }
    let q = (d2 - d1).exp();
    let tail = if q < 1.0 { d2.exp() * q / (1.0 - q) } else { f64::INFINITY };
    Ok(Admissibility::Finite {
        value: log_add(i4, d2).exp() + tail,
        partial: i4.exp(),
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_growth_diverges() {
        for &alpha in &[0.3, 0.5, 0.9] {
            let r = admissibility(&GrowthFunction::power(1.0), alpha, 0.1, 1e6).unwrap();
            assert!(r.is_divergent(), "{alpha}: {r:?}");
        }
    }

    #[test]
    fn quadratic_growth_value() {
        let r = admissibility(&GrowthFunction::power(2.0), 0.5, 0.1, 10.0).unwrap();
        match r {
            Admissibility::Finite { value, .. } => assert!((value - 1.0 / 2.1).abs() < 1e-10, "{value}"),
            _ => panic!("{r:?}"),
        }
    }

    #[test]
    fn bounded_growth_diverges() {
        let r = admissibility(&GrowthFunction::saturating(), 0.5, 0.1, 1e4).unwrap();
        assert!(r.is_divergent());
    }

    #[test]
    fn zero_on_the_axis_is_rejected() {
        let w = GrowthFunction::custom("dead", true, |s: f64| if s < 5.0 { s } else { 0.0 });
        assert!(matches!(admissibility(&w, 0.5, 0.1, 100.0), Err(FracError::Growth(_))));
    }

    #[test]
    fn validation() {
        assert!(GrowthFunction::power(3.0).validate(1e6).is_ok());
        let w = GrowthFunction::custom("shifted", true, |s: f64| s + 1.0);
        assert!(w.validate(10.0).is_err());
        let w = GrowthFunction::custom("dip", true, |s: f64| s * (2.0 + s.sin()));
        assert!(w.validate(100.0).is_err());
    }
}
