use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{preset, InitialData, RunConfig};
use super::run::compute_point;
use crate::calculus::{caputo_derivative, gronwall_bound, rl_integral, TimeGrid};
use crate::error::{FracError, Result};
use crate::mittag_leffler::{ml_derivative_pair, ml_series, MittagLeffler, MlConfig, MlParams};
use crate::solver::{
    perturbed_distance_bound, solve_linear, solve_local, solve_with_continuation, DuhamelKernel, GlobalRegime,
    NonlinearitySpec, PicardSettings, Status,
};
use crate::spectral::{
    random_field, relative_bound_probe, DiagonalizedOperator, Potential, ProbeSettings, Propagator, StateField, SymbolSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One measured quantity against its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    /// Acceptance criterion number, if the check belongs to one.
    pub criterion: Option<u8>,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn new(criterion: Option<u8>, name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
        };
        Check { criterion, name: name.into(), measured, threshold, relation, pass, error: None }
    }

    fn failed(criterion: Option<u8>, name: impl Into<String>, err: FracError) -> Self {
        Check {
            criterion,
            name: name.into(),
            measured: f64::NAN,
            threshold: f64::NAN,
            relation: Relation::AtMost,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        let crit = self.criterion.map(|c| format!("[{c:>2}] ")).unwrap_or_else(|| "     ".into());
        if let Some(e) = &self.error {
            return write!(f, "{tag} {crit}{}: error: {e}", self.name);
        }
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(f, "{tag} {crit}{}: {:.4e} {rel} {:.4e}", self.name, self.measured, self.threshold)
    }
}

pub const SUITES: [&str; 6] = ["ml", "calculus", "operators", "solver", "asymptotics", "all"];

/// Runs a named suite.
pub fn suite(name: &str) -> Result<Vec<Check>> {
    let criteria: &[u8] = match name {
        "ml" => &[1],
        "calculus" => &[6],
        "operators" => &[3, 4, 10, 11],
        "solver" => &[2, 5, 7, 8],
        "asymptotics" => &[9],
        "all" => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
        other => return Err(FracError::invalid(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")))),
    };
    let mut out = Vec::new();
    if matches!(name, "calculus" | "all") {
        out.extend(calculus_basics());
    }
    for &c in criteria {
        out.extend(criterion(c));
    }
    Ok(out)
}

/// The checks of one acceptance criterion (1 to 11).
pub fn criterion(n: u8) -> Vec<Check> {
    let r = match n {
        1 => c1_mittag_leffler(),
        2 => c2_scalar_oracle(),
        3 => c3_semigroup(),
        4 => c4_operator_bounds(),
        5 => c5_holder(),
        6 => c6_gronwall(),
        7 => c7_continuous_dependence(),
        8 => c8_blowup_alternative(),
        9 => c9_asymptotics(),
        10 => c10_gamma_scaling(),
        11 => c11_dense_vs_fft(),
        _ => Err(FracError::invalid(format!("no criterion {n}"))),
    };
    r.unwrap_or_else(|e| vec![Check::failed(Some(n), format!("criterion {n}"), e)])
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn schr(side: usize) -> Result<DiagonalizedOperator> {
    DiagonalizedOperator::build_diagonal(SymbolSpec::Schrodinger { dim: 1 }, side, 2.0 * PI)
}

fn scalar(a: f64) -> Result<DiagonalizedOperator> {
    DiagonalizedOperator::from_hermitian(DMatrix::from_element(1, 1, c(a, 0.0)))
}

fn pair(alpha: f64) -> Result<(Propagator, DuhamelKernel)> {
    let cfg = MlConfig::default();
    Ok((Propagator::new(alpha, cfg)?, DuhamelKernel::new(alpha, cfg)?))
}

fn c1_mittag_leffler() -> Result<Vec<Check>> {
    let start = Instant::now();
    let cfg = MlConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e11 = MittagLeffler::new(1.0, 1.0, cfg)?;
    let mut exp_err: f64 = 0.0;
    for _ in 0..200 {
        let r = 20.0 * rng.random::<f64>().sqrt();
        let z = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
        let e = z.exp();
        exp_err = exp_err.max((e11.eval(z)? - e).norm() / e.norm().max(1.0));
    }

    let mut overlap: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let (lo, hi) = cfg.overlap_annulus(alpha);
        for beta in [1.0, alpha] {
            let ml = MittagLeffler::new(alpha, beta, cfg)?;
            for i in 0..=12 {
                let s = lo * (hi / lo).powf(i as f64 / 12.0);
                for z in [c(0.0, s), c(0.0, -s)] {
                    let series = ml_series(MlParams::new(alpha, beta, z), 1e-20)?;
                    let asym = ml.eval_asymptotic(z)?;
                    overlap = overlap.max((series - asym).norm() / (1.0 + series.norm()));
                }
            }
        }
    }

    let mut deriv: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.8] {
        let e1 = MittagLeffler::new(alpha, 1.0, cfg)?;
        let ea = MittagLeffler::new(alpha, alpha, cfg)?;
        for lambda in [c(-1.0, 0.0), c(0.0, 3.0), c(1.0, -2.0)] {
            for t in [0.3, 1.0, 1.7] {
                let (d1, d2) = ml_derivative_pair(alpha, lambda, t, &cfg)?;
                let s = |t: f64| e1.eval(lambda * t.powf(alpha));
                let p = |t: f64| ea.eval(lambda * t.powf(alpha)).map(|v| v * t.powf(alpha - 1.0));
                let h = 1e-5;
                let fd1 = (s(t + h)? - s(t - h)?) / (2.0 * h);
                let fd2 = (p(t + h)? - p(t - h)?) / (2.0 * h);
                deriv = deriv.max(rel(d1, fd1)).max(rel(d2, fd2));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let k = Some(1);
    Ok(vec![
        Check::new(k, "E_{1,1}(z) vs e^z, 200 points |z| <= 20 (relative)", exp_err, Relation::AtMost, 1e-12),
        Check::new(k, "series vs asymptotic on the overlap annulus", overlap, Relation::AtMost, 1e-6),
        Check::new(k, "derivative identities vs central differences", deriv, Relation::AtMost, 1e-6),
        Check::new(k, "runtime of the checks above [s]", secs, Relation::AtMost, 10.0),
    ])
}

fn c2_scalar_oracle() -> Result<Vec<Check>> {
    let cfg = MlConfig::default();
    let (x, f0, horizon) = (c(1.0, 0.5), c(1.0, 0.0), 2.0);
    let mut closed: f64 = 0.0;
    let mut order = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for lambda in [1.0, 5.0] {
        let op = scalar(lambda)?;
        for alpha in [0.3, 0.5, 0.8] {
            let (prop, kernel) = pair(alpha)?;
            let e1 = MittagLeffler::new(alpha, 1.0, cfg)?;
            let grid = TimeGrid::for_alpha(horizon, 512, alpha)?;
            let v = vec![StateField::new(vec![f0]); grid.len()];
            let tr = solve_linear(&prop, &kernel, &op, &StateField::new(vec![x]), &v, &grid)?;
            for (t, u) in grid.nodes().iter().zip(&tr.states) {
                let e = e1.eval(c(0.0, lambda * t.powf(alpha)))?;
                let exact = e * x - f0 / lambda * (c(1.0, 0.0) - e);
                closed = closed.max(rel(u.coeffs()[0], exact));
            }

            // forcing κ E_{α,1}(i(λ+κ)t^α) x has the solution E_{α,1}(i(λ+κ)t^α) x
            let kappa = 0.7;
            let mut errs = Vec::new();
            for n in [128, 256, 512] {
                let grid = TimeGrid::for_alpha(horizon, n, alpha)?;
                let exact: Vec<Complex64> = grid
                    .nodes()
                    .iter()
                    .map(|&t| e1.eval(c(0.0, (lambda + kappa) * t.powf(alpha))).map(|e| e * x))
                    .collect::<Result<_>>()?;
                let v: Vec<StateField> = exact.iter().map(|&u| StateField::new(vec![u * kappa])).collect();
                let tr = solve_linear(&prop, &kernel, &op, &StateField::new(vec![x]), &v, &grid)?;
                let err = tr.states.iter().zip(&exact).map(|(u, e)| (u.coeffs()[0] - e).norm()).fold(0.0, f64::max);
                errs.push(err);
            }
            for w in errs.windows(2) {
                let q = (w[0] / w[1]).log2();
                order = order.min(q);
                margin = margin.min(q - (2.0 - alpha - 0.2));
            }
        }
    }
    let k = Some(2);
    Ok(vec![
        Check::new(k, "closed form, 512 graded nodes, λ ∈ {1,5}, α ∈ {0.3,0.5,0.8} (max relative)", closed, Relation::AtMost, 1e-4),
        Check::new(k, "observed order minus (2 - α - 0.2), worst case", margin, Relation::AtLeast, 0.0),
        Check::new(k, "smallest observed order", order, Relation::AtLeast, 1.0),
    ])
}

fn c3_semigroup() -> Result<Vec<Check>> {
    let side = 32;
    let op = schr(side)?;
    let prop = Propagator::new(1.0, MlConfig::default())?;
    let mut worst: f64 = 0.0;
    for k in [1usize, 3, 7, 16, 25] {
        let a = op.eigenvalues()[k];
        let e = StateField::mode(side, k, c(1.0, 0.0));
        for t in [0.01, 0.37, 1.0, 2.9, 10.0] {
            let s = prop.apply_s(&op, t, &e)?;
            worst = worst.max((s.coeffs()[k] - Complex64::from_polar(1.0, a * t)).norm());
        }
    }
    Ok(vec![Check::new(Some(3), "α = 1 mode phase vs e^{ik²t}", worst, Relation::AtMost, 1e-10)])
}

fn c4_operator_bounds() -> Result<Vec<Check>> {
    let alpha = 0.6;
    let prop = Propagator::new(alpha, MlConfig::default())?;
    let ts: Vec<f64> = (0..40).map(|i| 1e-3 * 10f64.powf(4.0 * i as f64 / 39.0)).collect();
    let mut bounds = Vec::new();
    for side in [64, 128] {
        let op = schr(side)?;
        let (mut b_h, mut b_da) = (0.0f64, 0.0f64);
        for s in 0..50 {
            let f = random_field(&op, 11, s, 1.0);
            for &t in &ts {
                let st = prop.apply_s(&op, t, &f)?;
                b_h = b_h.max(st.norm() / f.norm());
                b_da = b_da.max(op.graph_norm(&st) / ((1.0 + t.powf(-alpha)) * f.norm()));
            }
        }
        bounds.push((b_h, b_da));
    }
    let k = Some(4);
    Ok(vec![
        Check::new(k, "sup ‖S_tφ‖/‖φ‖ at N=64", bounds[0].0, Relation::AtMost, 1.0 + 1e-12),
        Check::new(k, "H bound change N=64 -> 128", (bounds[0].0 / bounds[1].0 - 1.0).abs(), Relation::AtMost, 0.05),
        Check::new(k, "D(A) bound change N=64 -> 128", (bounds[0].1 / bounds[1].1 - 1.0).abs(), Relation::AtMost, 0.05),
    ])
}

fn run_preset_points(cfg: &RunConfig) -> Result<Vec<(f64, crate::solver::Trajectory, super::run::Fitted)>> {
    cfg.validate()?;
    let base = cfg.operator.build()?;
    cfg.points()
        .into_iter()
        .map(|p| compute_point(cfg, &base, p).map(|(t, f)| (p.alpha, t, f)))
        .collect()
}

fn c5_holder() -> Result<Vec<Check>> {
    let k = Some(5);
    let mut out = Vec::new();
    for name in ["holder", "lq-forcing"] {
        let cfg = preset(name)?;
        let case = cfg.holder.expect("Hölder preset").case;
        for (alpha, _, fitted) in run_preset_points(&cfg)? {
            let fit = fitted.holder.ok_or_else(|| FracError::invalid(format!("{name}: no Hölder fit")))?;
            let slope = fit.slope.unwrap_or(f64::NAN);
            out.push(Check::new(
                k,
                format!("{name} α={alpha}: Hölder slope vs predicted {:.2} - 0.1", case.predicted(alpha)),
                slope,
                Relation::AtLeast,
                case.predicted(alpha) - 0.1,
            ));
        }
    }
    Ok(out)
}

fn c6_gronwall() -> Result<Vec<Check>> {
    // u = 1 + b ∫ (t-s)^{α-1} u(s) ds, i.e. D^α u = bΓ(α) u = i F(u) with F = -i bΓ(α) u
    let cfg = MlConfig::default();
    let op = scalar(0.0)?;
    let mut worst: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for (b, alpha) in [(1.0, 0.5), (2.0, 0.7)] {
        let (prop, kernel) = pair(alpha)?;
        let f = NonlinearitySpec::Power { lambda: 0.0, lambda_im: -b * libm::tgamma(alpha), p: 1.0 };
        let tr = solve_with_continuation(&prop, &kernel, &op, &StateField::new(vec![c(1.0, 0.0)]), &f, 1.0, &Default::default())?;
        if !tr.status.is_completed() {
            return Err(FracError::invalid(format!("Gronwall equality case ended in {}", tr.status.label())));
        }
        for (t, u) in tr.nodes.iter().zip(&tr.states) {
            let bound = gronwall_bound(|_| 1.0, b, alpha, *t, &cfg)?;
            let r = u.coeffs()[0].norm() / bound - 1.0;
            excess = excess.max(r);
            worst = worst.max(r.abs());
        }
    }
    let k = Some(6);
    Ok(vec![
        Check::new(k, "equality case: max u/bound - 1", excess, Relation::AtMost, 0.01),
        Check::new(k, "equality case: max |u/bound - 1| (tightness)", worst, Relation::AtMost, 0.01),
    ])
}

fn calculus_basics() -> Vec<Check> {
    let run = || -> Result<Vec<Check>> {
        let grid = TimeGrid::for_alpha(1.0, 64, 0.4)?;
        let ones = vec![c(1.0, 0.0); grid.len()];
        let i = rl_integral(0.4, &grid, &ones)?;
        let e_int = (i[grid.len() - 1].re - 1.0 / libm::tgamma(1.4)).abs();
        let line: Vec<Complex64> = grid.nodes().iter().map(|&t| c(t, 0.0)).collect();
        let d = caputo_derivative(0.4, &grid, &line)?;
        let e_der = grid.nodes()[1..]
            .iter()
            .zip(&d)
            .map(|(t, v)| (v.re - t.powf(0.6) / libm::tgamma(1.6)).abs())
            .fold(0.0, f64::max);
        Ok(vec![
            Check::new(None, "I^α 1 = t^α/Γ(1+α) at t = 1", e_int, Relation::AtMost, 1e-13),
            Check::new(None, "Caputo derivative of t is exact", e_der, Relation::AtMost, 1e-12),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed(None, "calculus basics", e)])
}

fn c7_continuous_dependence() -> Result<Vec<Check>> {
    let cfg = preset("linear-kappa")?;
    let alpha = cfg.alpha[0];
    let op = cfg.operator.build()?;
    let (prop, kernel) = pair(alpha)?;
    let x = cfg.initial.build(&op, cfg.seed)?;
    let y = &x + &(&random_field(&op, cfg.seed + 1, 0, 2.0) * c(0.01, 0.0));
    // (C over all nodes, C over t > 0); the first is 1 whenever S_t is contractive
    let c_min = |n: usize| -> Result<(f64, f64)> {
        let grid = TimeGrid::for_alpha(cfg.horizon[0], n, alpha)?;
        let p = PicardSettings::default();
        let u = solve_local(&prop, &kernel, &op, &x, &cfg.nonlinearity, &grid, &p)?;
        let v = solve_local(&prop, &kernel, &op, &y, &cfg.nonlinearity, &grid, &p)?;
        let chk = perturbed_distance_bound(&op, &u, &v, f64::INFINITY, alpha, &cfg.ml)?;
        Ok((chk.c_min, chk.ratios[1..].iter().cloned().fold(0.0, f64::max)))
    };
    let (a, b) = (c_min(cfg.intervals)?, c_min(2 * cfg.intervals)?);
    let k = Some(7);
    Ok(vec![
        Check::new(k, "smallest C is finite (coarse grid)", a.0, Relation::AtMost, f64::MAX),
        Check::new(k, "change of smallest C under grid doubling", (a.0 / b.0 - 1.0).abs(), Relation::AtMost, 0.1),
        Check::new(k, "change of smallest C over t > 0 under grid doubling", (a.1 / b.1 - 1.0).abs(), Relation::AtMost, 0.1),
    ])
}

fn c8_blowup_alternative() -> Result<Vec<Check>> {
    let k = Some(8);
    let mut out = Vec::new();
    let sat = preset("saturating")?;
    let horizon = sat.horizon[0];
    let (_, tr, fitted) = run_preset_points(&sat)?.remove(0);
    out.push(Check::new(k, "saturating: completed horizon (1 = completed)", tr.status.is_completed() as u8 as f64, Relation::AtLeast, 1.0));
    out.push(Check::new(k, "saturating: t_end", tr.t_end(), Relation::AtLeast, horizon * (1.0 - 1e-12)));
    let global = fitted.classification.map(|g| g.regime == GlobalRegime::GlobalRegime).unwrap_or(false);
    out.push(Check::new(k, "saturating: classified global_regime (1 = yes)", global as u8 as f64, Relation::AtLeast, 1.0));

    let mut times = Vec::new();
    for x0 in [2.0, 4.0, 8.0] {
        let mut cfg = preset("cubic-blowup")?;
        cfg.initial = InitialData::Constant { re: x0, im: 0.0 };
        let (_, tr, _) = run_preset_points(&cfg)?.remove(0);
        match tr.status {
            Status::BlowUp { t_est } => times.push(t_est),
            ref s => return Err(FracError::invalid(format!("cubic with x0 = {x0} ended in {}", s.label()))),
        }
    }
    let worst_increase = times.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::new(k, "cubic: blow_up for x0 ∈ {2,4,8} (count)", times.len() as f64, Relation::AtLeast, 3.0));
    out.push(Check::new(k, "cubic: max increase of T_est with ‖x‖", worst_increase, Relation::AtMost, 0.0));
    Ok(out)
}

fn c9_asymptotics() -> Result<Vec<Check>> {
    let k = Some(9);
    let mut out = Vec::new();
    for name in ["steady-state", "vanishing", "stiff"] {
        let start = Instant::now();
        let cfg = preset(name)?;
        let (alpha, _, fitted) = run_preset_points(&cfg)?.remove(0);
        let secs = start.elapsed().as_secs_f64();
        let table = fitted.table.expect("table mode");
        let worst_step = table.rows.windows(2).map(|w| w[1].error / w[0].error).fold(0.0, f64::max);
        out.push(Check::new(k, format!("{name}: largest error ratio between successive rows"), worst_step, Relation::AtMost, 1.0 - 1e-12));
        if name == "steady-state" {
            out.push(Check::new(k, format!("{name}: log-log slope vs -α + 0.15"), table.slope, Relation::AtMost, -alpha + 0.15));
        }
        out.push(Check::new(k, format!("{name}: runtime [s]"), secs, Relation::AtMost, 60.0));
    }
    Ok(out)
}

fn c10_gamma_scaling() -> Result<Vec<Check>> {
    let symbol = SymbolSpec::Schrodinger { dim: 1 };
    let side = 1024;
    let gammas: Vec<f64> = (0..9).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    let r = relative_bound_probe(&symbol, &Potential::zero(side), &gammas, &ProbeSettings { side, ..Default::default() })?;

    let side = 256;
    let gammas: Vec<f64> = (0..13).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect();
    let q: Vec<f64> = (0..side).map(|j| 3.0 * (2.0 * PI * j as f64 / side as f64).cos().exp()).collect();
    let probe = relative_bound_probe(
        &symbol,
        &Potential { q, v: vec![0.0; side] },
        &gammas,
        &ProbeSettings { side, samples: 8, ..Default::default() },
    )?;
    let worst_step = probe.rows.windows(2).map(|w| w[1].c2 / w[0].c2).fold(0.0, f64::max);
    let last = probe.rows.last().map(|r| r.c2).unwrap_or(f64::NAN);
    let k = Some(10);
    Ok(vec![
        Check::new(k, "|slope + 1.5| over γ ∈ [1e2, 1e4]", (r.slope + 1.5).abs(), Relation::AtMost, 0.1),
        Check::new(k, "c2 ratio between successive γ", worst_step, Relation::AtMost, 1.0 - 1e-12),
        Check::new(k, "c2 at the largest γ", last, Relation::AtMost, 1.0),
    ])
}

fn c11_dense_vs_fft() -> Result<Vec<Check>> {
    let side = 256;
    let prop = Propagator::new(0.6, MlConfig::default())?;
    let (mut eig, mut field): (f64, f64) = (0.0, 0.0);
    for symbol in [SymbolSpec::Schrodinger { dim: 1 }, SymbolSpec::Airy, SymbolSpec::BenjaminOno] {
        let fft = DiagonalizedOperator::build_diagonal(symbol.clone(), side, 2.0 * PI)?;
        let dense = DiagonalizedOperator::build_perturbed(symbol, Potential::zero(side), side, 2.0 * PI)?;
        let scale = fft.eigenvalues().iter().fold(1.0f64, |m, a| m.max(a.abs()));
        let mut a = fft.eigenvalues().to_vec();
        let mut b = dense.eigenvalues().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        eig = eig.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale);
        for s in 0..3 {
            let f = random_field(&fft, 5, s, 1.0);
            let g = random_field(&dense, 5, s, 1.0);
            for t in [0.01, 0.7] {
                let pf = fft.to_physical(&prop.apply_s(&fft, t, &f)?);
                let pg = dense.to_physical(&prop.apply_s(&dense, t, &g)?);
                field = field.max(pf.iter().zip(&pg).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
            }
        }
    }
    let k = Some(11);
    Ok(vec![
        Check::new(k, "eigenvalue multisets, N=256 (relative to max |a|)", eig, Relation::AtMost, 1e-8),
        Check::new(k, "propagated random fields, physical space", field, Relation::AtMost, 1e-8),
    ])
}
