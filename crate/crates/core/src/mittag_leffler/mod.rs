//! Two-parameter Mittag-Leffler function `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)`.
//!
//! Evaluation switches on the scale `x = |z|^{1/α}`, which controls both the
//! cancellation in the power series (its largest term is roughly `e^x`) and
//! the accuracy of the asymptotic expansion (optimal truncation error roughly
//! `e^{-x}`):
//!
//! * `x <= fast_scale`: power series in plain double precision;
//! * `x <= switch_scale`: power series summed in double-double arithmetic;
//! * otherwise: the asymptotic expansion, optimally truncated, plus the
//!   exponential contribution `(1/α) ζ^{1-β} e^ζ` from every branch
//!   `ζ = z^{1/α} e^{2πim/α}` with `|arg z + 2πm| < απ`.
//!
//! For `α = 1` with integer `β` the closed forms in terms of `e^z` are used.

mod dd;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub(crate) use dd::is_nonpositive_integer;
use dd::{Dd, DdComplex};

use crate::error::{FracError, Result};

/// Inputs of a single evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
    pub z: Complex64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64, z: Complex64) -> Self {
        MlParams { alpha, beta, z }
    }
}

/// Branch-selection knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlConfig {
    /// Threshold on `|z|^{1/α}` between the series and the asymptotic branch.
    pub switch_scale: f64,
    /// Below this value of `|z|^{1/α}` the series is summed in plain `f64`.
    pub fast_scale: f64,
    /// Relative tail bound at which the series is truncated.
    pub series_tol: f64,
    /// Upper bound on the number of algebraic asymptotic terms.
    pub asymptotic_terms: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            switch_scale: 32.0,
            fast_scale: 4.0,
            series_tol: 1e-18,
            asymptotic_terms: 400,
        }
    }
}

impl MlConfig {
    /// `|z|` at which the branch switches for a given `α`.
    pub fn switch_radius(&self, alpha: f64) -> f64 {
        self.switch_scale.powf(alpha)
    }

    /// Annulus in `|z|` on which both branches are expected to meet 1e-6.
    ///
    /// It is the image of `[switch_scale / 1.5, 1.5 switch_scale]` under
    /// `x ↦ x^α`.
    pub fn overlap_annulus(&self, alpha: f64) -> (f64, f64) {
        (
            (self.switch_scale / 1.5).powf(alpha),
            (self.switch_scale * 1.5).powf(alpha),
        )
    }
}

/// Which formula produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    ClosedForm,
    Series,
    ExtendedSeries,
    Asymptotic,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::ClosedForm => "closed-form",
            Branch::Series => "series",
            Branch::ExtendedSeries => "series (double-double)",
            Branch::Asymptotic => "asymptotic",
        };
        f.write_str(s)
    }
}

/// `1/Γ(y)`, exactly zero at the poles `y = 0, -1, -2, …`.
pub fn rgamma(y: f64) -> f64 {
    if is_nonpositive_integer(y) {
        return 0.0;
    }
    if y.abs() < 170.0 {
        1.0 / libm::tgamma(y)
    } else {
        let (lg, sign) = libm::lgamma_r(y);
        sign as f64 * (-lg).exp()
    }
}

/// Lower edge `μ` of the algebraic sector, chosen just above `πα/2`.
pub fn sector_mu(alpha: f64) -> f64 {
    let lo = PI * alpha / 2.0;
    let hi = PI.min(PI * alpha);
    lo + (1e-3f64).min((hi - lo) / 2.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FracError::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Truncated power series, summed in double-double arithmetic.
///
/// Terms are formed as `exp(k ln|z| - ln Γ(αk+β))` so nothing overflows
/// before the magnitude check; summation stops once the geometric tail bound
/// falls below `tol · |sum|`.
pub fn ml_series(params: MlParams, tol: f64) -> Result<Complex64> {
    const HARD_CAP: usize = 100_000;
    let MlParams { alpha, beta, z } = params;
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(FracError::invalid("series tolerance must be positive"));
    }
    let modulus = z.norm();
    if modulus == 0.0 {
        return Ok(Complex64::new(rgamma(beta), 0.0));
    }
    let ln_mod = Dd::new(modulus).ln();
    let unit = DdComplex {
        re: Dd::new(z.re) / Dd::new(modulus),
        im: Dd::new(z.im) / Dd::new(modulus),
    };
    let mut phase = DdComplex::new(1.0, 0.0);
    let mut sum = DdComplex::ZERO;
    let mut prev_mag = f64::INFINITY;
    for k in 0..HARD_CAP {
        let y = Dd::prod(alpha, k as f64) + Dd::new(beta);
        if let Some((sign, lg)) = Dd::ln_abs_gamma(y) {
            let log_mag = ln_mod.mul_f64(k as f64) - lg;
            if log_mag.hi > 700.0 {
                return Err(FracError::SeriesNonConvergence {
                    modulus,
                    reason: "terms overflow double precision".into(),
                });
            }
            let mag = log_mag.exp();
            let term = phase.scale(mag.mul_f64(sign));
            sum = sum.add(term);
            let m = mag.to_f64();
            let ratio = m / prev_mag;
            if y.hi > 1.0 && ratio < 1.0 {
                let tail = m * ratio / (1.0 - ratio);
                if tail <= tol * sum.norm_f64() || m == 0.0 {
                    return Ok(Complex64::new(sum.re.to_f64(), sum.im.to_f64()));
                }
            }
            prev_mag = m;
        }
        phase = phase.mul(unit);
    }
    Err(FracError::SeriesNonConvergence {
        modulus,
        reason: format!("more than {HARD_CAP} terms required"),
    })
}

/// The algebraic expansion `-Σ_{k=1}^{p} z^{-k} / Γ(β - αk)`.
///
/// Valid for `0 < α < 2` and `μ <= |arg z| <= π` with `μ` from [`sector_mu`];
/// the omitted remainder is `O(|z|^{-1-p})`.
pub fn ml_asymptotic(params: MlParams, p: usize) -> Result<Complex64> {
    let MlParams { alpha, beta, z } = params;
    check_alpha(alpha)?;
    if alpha >= 2.0 {
        return Err(FracError::invalid("asymptotic expansion needs alpha < 2"));
    }
    if p == 0 {
        return Err(FracError::invalid("asymptotic expansion needs p >= 1"));
    }
    if z.norm() < 1.0 {
        return Err(FracError::invalid("asymptotic expansion needs |z| >= 1"));
    }
    let mu = sector_mu(alpha);
    let arg = z.arg();
    if arg.abs() < mu {
        return Err(FracError::OutsideSector { arg, mu });
    }
    let w = z.inv();
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=p {
        pow *= w;
        sum += pow * rgamma(beta - alpha * k as f64);
    }
    Ok(-sum)
}

/// Convenience wrapper: builds a [`MittagLeffler`] and evaluates once.
pub fn ml_eval(params: MlParams, cfg: &MlConfig) -> Result<Complex64> {
    Ok(ml_eval_branch(params, cfg)?.0)
}

/// Same as [`ml_eval`] but also reports the branch taken.
pub fn ml_eval_branch(params: MlParams, cfg: &MlConfig) -> Result<(Complex64, Branch)> {
    MittagLeffler::new(params.alpha, params.beta, *cfg)?.eval_branch(params.z)
}

/// `(d/dt E_{α,1}(λt^α), d/dt [t^{α-1} E_{α,α}(λt^α)])` from the closed
/// derivative identities.
pub fn ml_derivative_pair(
    alpha: f64,
    lambda: Complex64,
    t: f64,
    cfg: &MlConfig,
) -> Result<(Complex64, Complex64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::invalid(format!("derivative pair needs 0 < alpha <= 1, got {alpha}")));
    }
    if !(t > 0.0) {
        return Err(FracError::invalid(format!("derivative pair needs t > 0, got {t}")));
    }
    let z = lambda * t.powf(alpha);
    let e_aa = MittagLeffler::new(alpha, alpha, *cfg)?.eval(z)?;
    let e_am1 = MittagLeffler::new(alpha, alpha - 1.0, *cfg)?.eval(z)?;
    Ok((
        lambda * t.powf(alpha - 1.0) * e_aa,
        t.powf(alpha - 2.0) * e_am1,
    ))
}

/// Evaluator for fixed `(α, β)` with precomputed coefficient tables.
///
/// Construction costs a few hundred double-double gamma evaluations; each
/// subsequent call is a short polynomial sum. The type is immutable and can
/// be shared between threads.
#[derive(Clone, Debug)]
pub struct MittagLeffler {
    alpha: f64,
    beta: f64,
    cfg: MlConfig,
    closed_form: Option<i64>,
    radius: f64,
    /// `R^k / Γ(αk + β)` with `R` the series radius.
    series: Vec<Dd>,
    series_f64: Vec<f64>,
    /// `Σ_{j >= k} |series[j]|`.
    tails: Vec<f64>,
    /// `1 / Γ(β - αk)` for `k = 1..`.
    asym: Vec<f64>,
    /// `ln Γ(1 + αk - β)` envelope for optimal truncation.
    asym_envelope: Vec<f64>,
}

impl MittagLeffler {
    pub fn new(alpha: f64, beta: f64, cfg: MlConfig) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha >= 2.0 {
            return Err(FracError::invalid(format!(
                "evaluation is supported for 0 < alpha < 2, got {alpha}"
            )));
        }
        if !beta.is_finite() {
            return Err(FracError::invalid("beta must be finite"));
        }
        if !(cfg.fast_scale > 0.0 && cfg.switch_scale >= cfg.fast_scale) {
            return Err(FracError::invalid("need 0 < fast_scale <= switch_scale"));
        }
        let closed_form = (alpha == 1.0 && beta.fract() == 0.0 && beta.abs() < 64.0)
            .then_some(beta as i64);

        let radius = cfg.switch_scale.powf(alpha);
        let ln_r = Dd::new(radius).ln();
        let mut series = Vec::new();
        let mut peaked = false;
        let mut prev = 0.0f64;
        for k in 0..200_000usize {
            let y = Dd::prod(alpha, k as f64) + Dd::new(beta);
            let c = match Dd::ln_abs_gamma(y) {
                Some((sign, lg)) => (ln_r.mul_f64(k as f64) - lg).exp().mul_f64(sign),
                None => Dd::ZERO,
            };
            let mag = c.to_f64().abs();
            series.push(c);
            if y.hi > 2.0 && mag < prev {
                peaked = true;
            }
            // keep going until terms are negligible even for |z| = 2R
            if peaked && (mag == 0.0 || mag.ln() + k as f64 * std::f64::consts::LN_2 < -92.0) {
                break;
            }
            prev = mag;
        }
        let series_f64: Vec<f64> = series.iter().map(|c| c.to_f64()).collect();
        let mut tails = vec![0.0; series.len() + 1];
        for k in (0..series.len()).rev() {
            tails[k] = tails[k + 1] + series_f64[k].abs();
        }

        let n_asym = cfg.asymptotic_terms.max(1);
        let mut asym = Vec::with_capacity(n_asym);
        let mut asym_envelope = Vec::with_capacity(n_asym);
        for k in 1..=n_asym {
            let kf = k as f64;
            asym.push(rgamma(beta - alpha * kf));
            let arg = 1.0 + alpha * kf - beta;
            asym_envelope.push(if arg > 1.0 { libm::lgamma(arg) } else { 0.0 });
        }

        Ok(MittagLeffler {
            alpha,
            beta,
            cfg,
            closed_form,
            radius,
            series,
            series_f64,
            tails,
            asym,
            asym_envelope,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> &MlConfig {
        &self.cfg
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_branch(z)?.0)
    }

    pub fn eval_branch(&self, z: Complex64) -> Result<(Complex64, Branch)> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(FracError::invalid("non-finite argument"));
        }
        let modulus = z.norm();
        if modulus == 0.0 {
            return Ok((Complex64::new(rgamma(self.beta), 0.0), Branch::Series));
        }
        if let Some(m) = self.closed_form {
            if let Some(v) = closed_form_alpha_one(m, z) {
                return Ok((v, Branch::ClosedForm));
            }
        }
        let scale = modulus.powf(1.0 / self.alpha);
        if scale <= self.cfg.fast_scale {
            Ok((self.series_f64_sum(z), Branch::Series))
        } else if scale <= self.cfg.switch_scale {
            Ok((self.series_dd_sum(z, true), Branch::ExtendedSeries))
        } else {
            self.asymptotic(z).map(|v| (v, Branch::Asymptotic))
        }
    }

    /// Forces the double-double series regardless of `|z|`; only accurate
    /// while `|z|^{1/α}` stays within a few multiples of `switch_scale`.
    pub fn eval_series(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 2.0 * self.radius {
            return ml_series(MlParams::new(self.alpha, self.beta, z), self.cfg.series_tol);
        }
        Ok(self.series_dd_sum(z, false))
    }

    /// Forces the asymptotic branch (algebraic part plus exponential terms).
    pub fn eval_asymptotic(&self, z: Complex64) -> Result<Complex64> {
        self.asymptotic(z)
    }

    fn series_f64_sum(&self, z: Complex64) -> Complex64 {
        let w = z / self.radius;
        let wn = w.norm();
        let tol = self.cfg.series_tol.max(1e-17);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut pow_abs = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, &c) in self.series_f64.iter().enumerate() {
            sum += pow * c;
            pow *= w;
            pow_abs *= wn;
            if self.tails[k + 1] * pow_abs <= tol * sum.norm() {
                break;
            }
        }
        sum
    }

    fn series_dd_sum(&self, z: Complex64, early_stop: bool) -> Complex64 {
        let w = DdComplex {
            re: Dd::new(z.re) / Dd::new(self.radius),
            im: Dd::new(z.im) / Dd::new(self.radius),
        };
        let wn = z.norm() / self.radius;
        let mut pow = DdComplex::new(1.0, 0.0);
        let mut pow_abs = 1.0;
        let mut sum = DdComplex::ZERO;
        for (k, &c) in self.series.iter().enumerate() {
            sum = sum.add(pow.scale(c));
            pow = pow.mul(w);
            pow_abs *= wn;
            if early_stop && self.tails[k + 1] * pow_abs <= self.cfg.series_tol * sum.norm_f64() {
                break;
            }
        }
        Complex64::new(sum.re.to_f64(), sum.im.to_f64())
    }

    fn asymptotic(&self, z: Complex64) -> Result<Complex64> {
        let alpha = self.alpha;
        let arg = z.arg();
        let ln_mod = z.norm().ln();

        let mut exp_part = Complex64::new(0.0, 0.0);
        for m in -1i32..=1 {
            let theta = arg + 2.0 * PI * m as f64;
            if theta.abs() < alpha * PI {
                let ln_zeta = Complex64::new(ln_mod / alpha, theta / alpha);
                let zeta = ln_zeta.exp();
                exp_part += ((1.0 - self.beta) * ln_zeta + zeta).exp() / alpha;
            }
        }
        if !(exp_part.re.is_finite() && exp_part.im.is_finite()) {
            return Err(FracError::UnsupportedRegion {
                alpha,
                re: z.re,
                im: z.im,
            });
        }

        // optimal truncation: stop at the minimum of |z|^{-k} Γ(1 + αk - β)
        let w = z.inv();
        let mut pow = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut prev_env = f64::INFINITY;
        for (k, (&c, &lg)) in self.asym.iter().zip(&self.asym_envelope).enumerate() {
            let kf = (k + 1) as f64;
            let env = lg - kf * ln_mod;
            if env > prev_env && lg > 0.0 {
                break;
            }
            prev_env = env;
            pow *= w;
            sum += pow * c;
            let scale = (sum + exp_part).norm().max(f64::MIN_POSITIVE);
            if env.exp() < 1e-18 * scale {
                break;
            }
        }
        Ok(exp_part - sum)
    }
}

/// `E_{1,m}(z)` for integer `m`; `None` where the series is preferable.
fn closed_form_alpha_one(m: i64, z: Complex64) -> Option<Complex64> {
    if m <= 1 {
        return Some(z.powi((1 - m) as i32) * z.exp());
    }
    if z.norm() < 1.0 {
        return None;
    }
    // z^{1-m} (e^z - Σ_{k=0}^{m-2} z^k / k!)
    let mut head = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..=(m - 2) {
        if k > 0 {
            term = term * z / k as f64;
        }
        head += term;
    }
    Some((z.exp() - head) / z.powi((m - 1) as i32))
}
