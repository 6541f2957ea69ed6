mod support;

use std::f64::consts::PI;

use fracprop::calculus::{caputo_derivative, TimeGrid};
use fracprop::mittag_leffler::{MittagLeffler, MlConfig};
use fracprop::solver::*;
use fracprop::spectral::*;
use fracprop::FracError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use support::oracle::Oracle;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scalar(a: f64) -> DiagonalizedOperator {
    DiagonalizedOperator::from_hermitian(DMatrix::from_element(1, 1, c(a, 0.0))).unwrap()
}

fn one(z: Complex64) -> StateField {
    StateField::new(vec![z])
}

fn schr(side: usize) -> DiagonalizedOperator {
    DiagonalizedOperator::build_diagonal(SymbolSpec::Schrodinger { dim: 1 }, side, 2.0 * PI).unwrap()
}

struct Setup {
    prop: Propagator,
    kernel: DuhamelKernel,
}

fn setup(alpha: f64) -> Setup {
    let cfg = MlConfig::default();
    Setup { prop: Propagator::new(alpha, cfg).unwrap(), kernel: DuhamelKernel::new(alpha, cfg).unwrap() }
}

fn ml(alpha: f64, beta: f64, z: Complex64) -> Complex64 {
    MittagLeffler::new(alpha, beta, MlConfig::default()).unwrap().eval(z).unwrap()
}

fn relerr(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn duhamel_of_zero_is_zero() {
    let s = setup(0.6);
    let op = schr(8);
    let grid = TimeGrid::for_alpha(1.0, 16, 0.6).unwrap();
    let g = duhamel_g(&s.kernel, &op, &vec![op.zeros(); grid.len()], &grid).unwrap();
    assert!(g.iter().all(|f| f.norm() == 0.0));
}

#[test]
fn duhamel_on_a_null_mode_is_the_fractional_integral() {
    for alpha in [0.3, 0.7, 1.0] {
        let s = setup(alpha);
        let op = scalar(0.0);
        let grid = TimeGrid::for_alpha(2.0, 20, alpha).unwrap();
        let v = c(1.5, -0.5);
        let g = duhamel_g(&s.kernel, &op, &vec![one(v); grid.len()], &grid).unwrap();
        for (t, gt) in grid.nodes().iter().zip(&g) {
            let exact = v * t.powf(alpha) / libm::tgamma(alpha + 1.0);
            assert!((gt.coeffs()[0] - exact).norm() < 1e-13, "alpha {alpha} t {t}");
        }
    }
}

#[test]
fn duhamel_of_a_constant_on_a_scalar_mode() {
    // G F0 = i A^{-1} F0 - i A^{-1} S_t F0, checked against the oracle
    let s = setup(0.5);
    let lambda = 2.0;
    let op = scalar(lambda);
    let f0 = c(1.0, 0.5);
    let grid = TimeGrid::for_alpha(3.0, 48, 0.5).unwrap();
    let g = duhamel_g(&s.kernel, &op, &vec![one(f0); grid.len()], &grid).unwrap();
    let mut o = Oracle::new();
    for n in [1, 7, 20, 33, 48] {
        let t = grid.nodes()[n];
        let e = o.ml(1, 2, 2, (0.0, lambda * t.sqrt()));
        let exact = c(0.0, 1.0 / lambda) * (c(1.0, 0.0) - c(e.0, e.1)) * f0;
        assert!(relerr(g[n].coeffs()[0], exact) < 1e-12, "t {t}");
    }
}

#[test]
fn zero_forcing_is_the_propagator() {
    let s = setup(0.4);
    let op = schr(16);
    let x = random_field(&op, 3, 0, 1.5);
    let grid = TimeGrid::for_alpha(1.0, 12, 0.4).unwrap();
    let tr = solve_linear(&s.prop, &s.kernel, &op, &x, &vec![op.zeros(); grid.len()], &grid).unwrap();
    assert_eq!(tr.status, Status::Completed);
    for (t, u) in grid.nodes().iter().zip(&tr.states) {
        assert_eq!(u, &s.prop.apply_s(&op, *t, &x).unwrap());
    }
}

#[test]
fn scalar_constant_forcing_matches_closed_form() {
    let mut o = Oracle::new();
    let (lambda, x, f0) = (1.5, c(0.3, -1.0), c(2.0, 0.0));
    let s = setup(0.5);
    let op = scalar(lambda);
    let grid = TimeGrid::for_alpha(2.0, 64, 0.5).unwrap();
    let tr = solve_linear(&s.prop, &s.kernel, &op, &one(x), &vec![one(f0); grid.len()], &grid).unwrap();
    for n in [3, 30, 64] {
        let t = grid.nodes()[n];
        let e = o.ml(1, 2, 2, (0.0, lambda * t.sqrt()));
        let e = c(e.0, e.1);
        let exact = e * x - f0 / lambda * (c(1.0, 0.0) - e);
        assert!(relerr(tr.states[n].coeffs()[0], exact) < 1e-11, "t {t}");
    }
}

#[test]
fn alpha_one_free_mode_rotates() {
    let s = setup(1.0);
    let op = schr(16);
    let x = StateField::mode(16, 3, c(1.0, 0.0));
    let grid = TimeGrid::uniform(2.0, 10).unwrap();
    let tr = solve_linear(&s.prop, &s.kernel, &op, &x, &vec![op.zeros(); grid.len()], &grid).unwrap();
    for (t, u) in grid.nodes().iter().zip(&tr.states) {
        assert!((u.coeffs()[3] - c(0.0, 9.0 * t).exp()).norm() < 1e-12);
    }
}

#[test]
fn picard_with_zero_nonlinearity_is_the_linear_solve() {
    let s = setup(0.7);
    let op = schr(8);
    let x = random_field(&op, 1, 0, 2.0);
    let grid = TimeGrid::for_alpha(1.0, 16, 0.7).unwrap();
    let a = solve_local(&s.prop, &s.kernel, &op, &x, &NonlinearitySpec::Zero, &grid, &PicardSettings::default()).unwrap();
    let b = solve_linear(&s.prop, &s.kernel, &op, &x, &vec![op.zeros(); grid.len()], &grid).unwrap();
    assert_eq!(a.states, b.states);
    assert!(a.diagnostics[1..].iter().all(|d| d.iterations == 1));
}

#[test]
fn picard_linear_term_converges_to_the_scalar_ode() {
    // D^α u = i(λ + κ) u, u(0) = x has the solution E_{α,1}(i(λ+κ)t^α) x
    let (lambda, kappa, x) = (1.0, 0.7, c(1.0, 0.5));
    let s = setup(0.5);
    let op = scalar(lambda);
    let f = NonlinearitySpec::Linear { kappa };
    let solve = |n| {
        let grid = TimeGrid::for_alpha(2.0, n, 0.5).unwrap();
        solve_local(&s.prop, &s.kernel, &op, &one(x), &f, &grid, &PicardSettings::default()).unwrap()
    };
    let coarse = solve(64);
    let fine = solve(512);
    assert_eq!(coarse.status, Status::Completed);
    assert!(coarse.diagnostics.last().unwrap().contraction.unwrap() < 1.0);
    let mut o = Oracle::new();
    for n in [8, 32, 64] {
        let t = coarse.nodes[n];
        assert_eq!(t, fine.nodes[8 * n]);
        let e = o.ml(1, 2, 2, (0.0, (lambda + kappa) * t.sqrt()));
        let exact = c(e.0, e.1) * x;
        let u = coarse.states[n].coeffs()[0];
        let uf = fine.states[8 * n].coeffs()[0];
        assert!(relerr(u, exact) < 2e-3, "t {t}: {}", relerr(u, exact));
        assert!((u - uf).norm() < 2e-3, "refinement at t {t}");
        assert!(relerr(uf, exact) < relerr(u, exact));
    }
}

#[test]
fn zero_data_stays_zero() {
    let s = setup(0.6);
    let op = schr(8);
    let grid = TimeGrid::for_alpha(1.0, 8, 0.6).unwrap();
    for f in [
        NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 },
        NonlinearitySpec::Saturating { lambda: 2.0 },
        NonlinearitySpec::Flux { m: 2, coefficient: 1.0 },
    ] {
        let tr = solve_local(&s.prop, &s.kernel, &op, &op.zeros(), &f, &grid, &PicardSettings::default()).unwrap();
        assert!(tr.states.iter().all(|u| u.norm() == 0.0), "{}", f.name());
    }
}

#[test]
fn exhausted_picard_budget_is_a_tolerance_failure() {
    let s = setup(0.5);
    let op = scalar(1.0);
    let grid = TimeGrid::for_alpha(4.0, 16, 0.5).unwrap();
    let picard = PicardSettings { tol: 1e-12, max_iter: 3 };
    let tr = solve_local(&s.prop, &s.kernel, &op, &one(c(1.0, 0.0)), &NonlinearitySpec::Linear { kappa: 3.0 }, &grid, &picard)
        .unwrap();
    assert!(matches!(tr.status, Status::ToleranceFailure { iterations: 3, .. }), "{:?}", tr.status);
    assert_eq!(tr.len(), 1);
}

#[test]
fn invalid_problems_are_rejected() {
    let s = setup(0.5);
    let op = schr(8);
    let grid = TimeGrid::for_alpha(1.0, 8, 0.5).unwrap();
    let picard = PicardSettings::default();
    assert!(matches!(
        solve_local(&s.prop, &s.kernel, &op, &StateField::zeros(4), &NonlinearitySpec::Zero, &grid, &picard),
        Err(FracError::Shape { .. })
    ));
    let dense = scalar(1.0);
    assert!(solve_local(&s.prop, &s.kernel, &dense, &one(c(1.0, 0.0)), &NonlinearitySpec::Flux { m: 1, coefficient: 1.0 }, &grid, &picard)
        .is_err());
    let settings = ContinuationSettings::default();
    assert!(solve_with_continuation(&s.prop, &s.kernel, &op, &op.zeros(), &NonlinearitySpec::Zero, 0.0, &settings).is_err());
    let other = setup(0.7);
    assert!(MildSolver::new(&op, &s.prop, &other.kernel, &NonlinearitySpec::Zero, op.zeros()).is_err());
}

#[test]
fn power_nonlinearity_is_resolution_independent() {
    let f = NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.5, p: 3.0 };
    let field = |side| {
        let mut u = StateField::zeros(side);
        u.coeffs_mut()[1] = c(0.8, 0.0);
        u.coeffs_mut()[side - 2] = c(0.0, -0.3);
        u
    };
    let (a, b) = (schr(16), schr(64));
    let fa = f.eval(&a, &field(16)).unwrap();
    let fb = f.eval(&b, &field(64)).unwrap();
    for k in -6i64..=6 {
        let ia = k.rem_euclid(16) as usize;
        let ib = k.rem_euclid(64) as usize;
        assert!((fa.coeffs()[ia] - fb.coeffs()[ib]).norm() < 1e-13, "k {k}");
    }
    // |e^{ix}/sqrt(2π)|^2 = 1/(2π)
    let u = StateField::mode(32, 1, c(1.0, 0.0));
    let fu = NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 }.eval(&schr(32), &u).unwrap();
    assert!((fu.coeffs()[1] - c(1.0 / (2.0 * PI), 0.0)).norm() < 1e-14);
}

#[test]
fn continuation_with_zero_nonlinearity_completes() {
    let s = setup(0.5);
    let op = schr(8);
    let x = random_field(&op, 2, 0, 2.0);
    let tr = solve_with_continuation(&s.prop, &s.kernel, &op, &x, &NonlinearitySpec::Zero, 3.0, &ContinuationSettings::default())
        .unwrap();
    assert_eq!(tr.status, Status::Completed);
    assert!((tr.t_end() - 3.0).abs() < 1e-12);
    let last = s.prop.apply_s(&op, tr.t_end(), &x).unwrap();
    assert!(tr.last().distance(&last) < 1e-12);
    // the linear flow takes at most eight windows per unit time
    let windows = (tr.len() - 1 - 16) / 8 + 1;
    assert!(windows <= 24, "{windows}");
}

#[test]
fn saturating_term_is_global() {
    let f = NonlinearitySpec::Saturating { lambda: 1.0 };
    assert_eq!(classify_global(&f, 0.6).unwrap().regime, GlobalRegime::GlobalRegime);
    let s = setup(0.6);
    let op = schr(4);
    let x = &random_field(&op, 1, 0, 1.0) * c(3.0, 0.0);
    let tr = solve_with_continuation(&s.prop, &s.kernel, &op, &x, &f, 50.0, &ContinuationSettings::default()).unwrap();
    assert_eq!(tr.status, Status::Completed);
    assert!((tr.t_end() - 50.0).abs() < 1e-9);
    assert!(tr.diagnostics.iter().all(|d| d.graph_norm.is_finite()));
}

/// Explicit product-rectangle scheme for `u = x + I^α(u^3)` on a uniform
/// grid; returns the first time `u` exceeds `level`.
fn cubic_escape_time(alpha: f64, x: f64, t_max: f64, steps: usize, level: f64) -> Option<f64> {
    let h = t_max / steps as f64;
    let c = h.powf(alpha) / libm::tgamma(alpha + 1.0);
    let w: Vec<f64> = (0..=steps).map(|m| (m as f64).powf(alpha)).collect();
    let mut f = Vec::with_capacity(steps);
    let mut u = x;
    for n in 1..=steps {
        f.push(u * u * u);
        let s: f64 = (0..n).map(|j| f[j] * (w[n - j] - w[n - j - 1])).sum();
        u = x + c * s;
        if u > level {
            return Some(n as f64 * h);
        }
    }
    None
}

#[test]
fn gain_cubic_blows_up_earlier_for_larger_data() {
    let alpha = 0.6;
    let s = setup(alpha);
    let op = scalar(0.0);
    // i F = |u|^2 u, so real data solves D^α u = u^3
    let f = NonlinearitySpec::Power { lambda: 0.0, lambda_im: -1.0, p: 3.0 };
    let mut settings = ContinuationSettings::default();
    settings.blowup_threshold = 1e3;
    settings.policy.floor = 1e-12;
    let mut times = Vec::new();
    for x0 in [2.0, 4.0, 8.0] {
        let tr = solve_with_continuation(&s.prop, &s.kernel, &op, &one(c(x0, 0.0)), &f, 10.0, &settings).unwrap();
        let Status::BlowUp { t_est } = tr.status else { panic!("{:?}", tr.status) };
        assert!(tr.diagnostics.last().unwrap().graph_norm > settings.blowup_threshold);
        times.push(t_est);
    }
    assert!(times.windows(2).all(|w| w[1] <= w[0]), "{times:?}");
    let oracle = cubic_escape_time(alpha, 2.0, 0.0125, 4000, 1e3).unwrap();
    assert!((times[0] / oracle - 1.0).abs() < 0.03, "{} vs {oracle}", times[0]);
}

#[test]
fn global_classification_examples() {
    let lin = NonlinearitySpec::Linear { kappa: 1.0 };
    assert_eq!(classify_global(&lin, 0.5).unwrap().regime, GlobalRegime::GlobalRegime);
    let cubic = NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 };
    let r = classify_global(&cubic, 0.5).unwrap();
    assert_eq!(r.regime, GlobalRegime::BlowupPossible);
    assert_eq!(r.sweep.len(), EPS_SWEEP.len());
    let zero = classify_global(&NonlinearitySpec::Zero, 0.5).unwrap();
    assert_eq!(zero.regime, GlobalRegime::GlobalRegime);
    assert!(zero.sweep.is_empty());
}

#[test]
fn distance_bound_examples() {
    let alpha = 0.6;
    let s = setup(alpha);
    let cfg = MlConfig::default();
    let op = schr(8);
    let x = random_field(&op, 4, 0, 2.0);
    let y = &x + &(&random_field(&op, 4, 1, 2.0) * c(1e-3, 0.0));
    let grid = TimeGrid::for_alpha(2.0, 32, alpha).unwrap();
    let zero = vec![op.zeros(); grid.len()];
    let u = solve_linear(&s.prop, &s.kernel, &op, &x, &zero, &grid).unwrap();
    let u2 = solve_linear(&s.prop, &s.kernel, &op, &x, &zero, &grid).unwrap();
    let same = perturbed_distance_bound(&op, &u, &u2, 0.0, alpha, &cfg).unwrap();
    assert_eq!(same.c_min, 0.0);
    assert!(same.holds);

    let v = solve_linear(&s.prop, &s.kernel, &op, &y, &zero, &grid).unwrap();
    let chk = perturbed_distance_bound(&op, &u, &v, 1.0, alpha, &cfg).unwrap();
    let d = &x - &y;
    let direct = grid
        .nodes()
        .iter()
        .map(|&t| {
            let st = s.prop.apply_s(&op, t, &d).unwrap();
            let env = ml(alpha, 1.0, c(libm::tgamma(alpha) * t.powf(alpha), 0.0)).re;
            op.graph_norm(&st) / (env * op.graph_norm(&d))
        })
        .fold(0.0, f64::max);
    assert!((chk.c_min - direct).abs() < 1e-9 * direct);
    assert!(chk.holds && chk.c_min <= 1.0 + 1e-12);

    let short = TimeGrid::for_alpha(1.0, 32, alpha).unwrap();
    let w = solve_linear(&s.prop, &s.kernel, &op, &y, &vec![op.zeros(); short.len()], &short).unwrap();
    assert!(matches!(perturbed_distance_bound(&op, &u, &w, 1.0, alpha, &cfg), Err(FracError::Grid(_))));
}

#[test]
fn distance_constant_for_linear_term_is_stable() {
    let alpha = 0.7;
    let s = setup(alpha);
    let cfg = MlConfig::default();
    let op = schr(8);
    let f = NonlinearitySpec::Linear { kappa: 0.3 };
    let x = random_field(&op, 5, 0, 2.0);
    let y = &x + &(&random_field(&op, 5, 1, 2.0) * c(0.01, 0.0));
    let c_min = |n| {
        let grid = TimeGrid::for_alpha(1.0, n, alpha).unwrap();
        let p = PicardSettings::default();
        let u = solve_local(&s.prop, &s.kernel, &op, &x, &f, &grid, &p).unwrap();
        let v = solve_local(&s.prop, &s.kernel, &op, &y, &f, &grid, &p).unwrap();
        perturbed_distance_bound(&op, &u, &v, f64::INFINITY, alpha, &cfg).unwrap().c_min
    };
    let (a, b) = (c_min(32), c_min(64));
    assert!(a.is_finite() && b.is_finite());
    assert!((a / b - 1.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn holder_slopes() {
    // constant trajectory: flagged flat, no slope
    let s = setup(0.5);
    let op = scalar(0.0);
    let grid = TimeGrid::for_alpha(2.0, 128, 0.5).unwrap();
    let x = one(c(1.0, 0.0));
    let tr = solve_linear(&s.prop, &s.kernel, &op, &x, &vec![op.zeros(); grid.len()], &grid).unwrap();
    let fit = holder_slope(&tr, (0.1, 2.0), HolderCase::DomainData, 0.5).unwrap();
    assert!(fit.flat && fit.slope.is_none());

    for alpha in [0.5, 0.9] {
        let s = setup(alpha);
        let op = scalar(1.0);
        let grid = TimeGrid::for_alpha(2.0, 256, alpha).unwrap();
        let tr = solve_linear(&s.prop, &s.kernel, &op, &x, &vec![op.zeros(); grid.len()], &grid).unwrap();
        let fit = holder_slope(&tr, (0.05, 2.0), HolderCase::DomainData, alpha).unwrap();
        assert!(fit.slope.unwrap() >= alpha - 0.1, "alpha {alpha}: {fit:?}");
        assert!(fit.pairs >= 8);
    }
    assert!(matches!(holder_slope(&tr, (0.5, 0.2), HolderCase::DomainData, 0.5), Err(FracError::InvalidParameter(_))));
}

#[test]
fn steady_state_error_is_the_decaying_propagator() {
    let s = setup(0.5);
    let op = scalar(1.0);
    let table = steady_state(&s.prop, &s.kernel, &op, &one(c(0.0, 0.0)), &one(c(1.0, 0.0)), &[5.0, 10.0, 20.0, 40.0], 128)
        .unwrap();
    assert!(table.is_monotone());
    let mut o = Oracle::new();
    for row in &table.rows {
        let e = o.ml(1, 2, 2, (0.0, row.parameter.sqrt()));
        let exact = e.0.hypot(e.1);
        assert!((row.error - exact).abs() < 1e-10 * exact, "{} vs {exact}", row.error);
    }
    assert!(table.slope < -0.5 + 0.15);
    let singular = DiagonalizedOperator::from_hermitian(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])))
        .unwrap();
    assert!(steady_state(&s.prop, &s.kernel, &singular, &singular.zeros(), &StateField::zeros(2), &[1.0], 8).is_err());
}

#[test]
fn vanishing_operator_without_forcing_returns_to_the_data() {
    let s = setup(0.6);
    let op = schr(8);
    let x = random_field(&op, 6, 0, 2.0);
    let zero = op.zeros();
    let forcing = move |_t: f64| zero.clone();
    let grid = TimeGrid::for_alpha(1.0, 32, 0.6).unwrap();
    let table = vanishing_operator(&s.prop, &s.kernel, &op, &x, &forcing, &[1e-1, 1e-2, 1e-3, 1e-4], &grid).unwrap();
    assert!(table.is_monotone(), "{table:?}");
    assert!(table.rows.last().unwrap().error < 1e-2);
}

#[test]
fn stiff_limit_tracks_the_quasi_static_state() {
    let s = setup(0.6);
    let op = scalar(1.0);
    let forcing = |t: f64| one(c(t.sin(), 0.0));
    let grid = TimeGrid::for_alpha(2.0, 256, 0.6).unwrap();
    let table = stiff_limit(&s.prop, &s.kernel, &op, &one(c(0.0, 0.0)), &forcing, &[1e-1, 1e-2, 1e-3, 1e-4], &grid, 0.2).unwrap();
    assert!(table.is_monotone(), "{table:?}");
    assert!(table.rows.last().unwrap().error < 0.05);
}

#[test]
fn picard_fixed_point_residual() {
    let alpha = 0.6;
    let s = setup(alpha);
    let op = schr(8);
    let x = &random_field(&op, 8, 0, 2.0) * c(0.5, 0.0);
    let f = NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 };
    let grid = TimeGrid::for_alpha(0.5, 32, alpha).unwrap();
    let picard = PicardSettings::default();
    let tr = solve_local(&s.prop, &s.kernel, &op, &x, &f, &grid, &picard).unwrap();
    assert_eq!(tr.status, Status::Completed);
    let v: Vec<StateField> = tr.states.iter().map(|u| f.eval(&op, u).unwrap()).collect();
    let g = duhamel_g(&s.kernel, &op, &v, &grid).unwrap();
    let scale = tr.diagnostics.iter().map(|d| d.graph_norm).fold(1.0, f64::max);
    let residual = tr
        .states
        .iter()
        .zip(&g)
        .zip(grid.nodes())
        .map(|((u, gv), &t)| {
            let mut k = s.prop.apply_s(&op, t, &x).unwrap();
            k.axpy(c(0.0, 1.0), gv);
            op.graph_norm(&(u - &k))
        })
        .fold(0.0, f64::max);
    assert!(residual <= 2.0 * picard.tol * scale, "{residual:e}");
}

#[test]
fn duhamel_bound_is_uniform_in_the_horizon() {
    let alpha = 0.5;
    let s = setup(alpha);
    let op = schr(16);
    // sup_y |E_{α,α}(iy)| on a fine sample bounds the kernel
    let sup = (0..=4000)
        .map(|i| ml(alpha, alpha, c(0.0, -200.0 + 0.1 * i as f64)).norm())
        .fold(0.0, f64::max);
    let bound = sup / alpha;
    for (i, t_end) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let grid = TimeGrid::for_alpha(t_end, 32, alpha).unwrap();
        let v: Vec<StateField> = (0..grid.len()).map(|n| random_field(&op, 100 + i as u64, n as u64, 0.5)).collect();
        let vmax = v.iter().map(|f| f.norm()).fold(0.0, f64::max);
        let g = duhamel_g(&s.kernel, &op, &v, &grid).unwrap();
        let ratio = g.iter().map(|f| f.norm()).fold(0.0, f64::max) / (t_end.powf(alpha) * vmax);
        assert!(ratio <= 1.1 * bound, "T {t_end}: {ratio} > {bound}");
    }
}

#[test]
fn duhamel_modulus_of_continuity() {
    let alpha = 0.6;
    let s = setup(alpha);
    let op = schr(8);
    let a = random_field(&op, 11, 0, 1.0);
    let b = random_field(&op, 11, 1, 1.0);
    let fit = |n: usize| {
        let grid = TimeGrid::for_alpha(2.0, n, alpha).unwrap();
        let v: Vec<StateField> = grid
            .nodes()
            .iter()
            .map(|&t| &(&a * c((3.0 * t).cos(), 0.0)) + &(&b * c(t.sin(), 0.0)))
            .collect();
        let vmax = v.iter().map(|f| f.norm()).fold(0.0, f64::max);
        let g = duhamel_g(&s.kernel, &op, &v, &grid).unwrap();
        let t = grid.nodes();
        let stride = n / 16;
        let mut cmax = 0.0f64;
        for i in (0..=n).step_by(stride) {
            for j in (i + stride..=n).step_by(stride) {
                let gap = (t[j] - t[i]).powf(alpha) + (t[j].powf(alpha + 1.0) - t[i].powf(alpha + 1.0)).abs();
                cmax = cmax.max(g[j].distance(&g[i]) / (gap * vmax));
            }
        }
        cmax
    };
    let (c1, c2) = (fit(64), fit(128));
    assert!(c1.is_finite() && c1 > 0.0);
    assert!((c1 / c2 - 1.0).abs() < 0.1, "{c1} {c2}");
}

#[test]
fn one_window_or_two_agree() {
    let alpha = 0.7;
    let s = setup(alpha);
    let op = schr(8);
    let x = &random_field(&op, 12, 0, 2.0) * c(0.5, 0.0);
    let f = NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 };
    let picard = PicardSettings::default();
    let grid = TimeGrid::for_alpha(1.0, 32, alpha).unwrap();
    let nodes = &grid.nodes()[1..];
    let mut one_shot = MildSolver::new(&op, &s.prop, &s.kernel, &f, x.clone()).unwrap();
    assert!(matches!(one_shot.advance(nodes, &picard).unwrap(), WindowOutcome::Converged { .. }));
    let mut split = MildSolver::new(&op, &s.prop, &s.kernel, &f, x.clone()).unwrap();
    let half = nodes.iter().position(|&t| t >= 0.5).unwrap() + 1;
    assert!(matches!(split.advance(&nodes[..half], &picard).unwrap(), WindowOutcome::Converged { .. }));
    assert!(matches!(split.advance(&nodes[half..], &picard).unwrap(), WindowOutcome::Converged { .. }));
    let (a, b) = (one_shot.finish(Status::Completed), split.finish(Status::Completed));
    let scale = a.diagnostics.iter().map(|d| d.graph_norm).fold(1.0, f64::max);
    assert!(op.graph_norm(&(a.last() - b.last())) <= 5.0 * picard.tol * scale);
}

#[test]
fn linear_solve_satisfies_the_mode_equation() {
    let alpha = 0.6;
    let s = setup(alpha);
    let op = schr(8);
    let x = random_field(&op, 13, 0, 2.0);
    let f0 = random_field(&op, 13, 1, 2.0);
    let grid = TimeGrid::for_alpha(1.0, 1024, alpha).unwrap();
    let forcing: Vec<StateField> = grid.nodes().iter().map(|&t| &f0 * c(1.0 + t, 0.0)).collect();
    let tr = solve_linear(&s.prop, &s.kernel, &op, &x, &forcing, &grid).unwrap();
    for (k, &a) in op.eigenvalues().iter().enumerate() {
        let u: Vec<Complex64> = tr.states.iter().map(|f| f.coeffs()[k]).collect();
        let d = caputo_derivative(alpha, &grid, &u).unwrap();
        let scale = u.iter().map(|z| z.norm() * (1.0 + a.abs())).fold(1.0, f64::max);
        for n in 1..grid.len() {
            if grid.nodes()[n] < 0.1 {
                continue;
            }
            let rhs = c(0.0, a) * u[n] + c(0.0, 1.0) * forcing[n].coeffs()[k];
            assert!((d[n - 1] - rhs).norm() < 5e-3 * scale, "mode {k} t {}", grid.nodes()[n]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duhamel_is_linear(seed in 0u64..500, alpha in 0.2f64..1.0, w in -2.0f64..2.0) {
        let s = setup(alpha);
        let op = schr(8);
        let grid = TimeGrid::for_alpha(1.0, 12, alpha).unwrap();
        let v: Vec<StateField> = (0..grid.len()).map(|n| random_field(&op, seed, n as u64, 1.0)).collect();
        let u: Vec<StateField> = (0..grid.len()).map(|n| random_field(&op, seed + 1000, n as u64, 1.0)).collect();
        let mix: Vec<StateField> = v.iter().zip(&u).map(|(a, b)| &(a * c(w, 0.0)) + b).collect();
        let gv = duhamel_g(&s.kernel, &op, &v, &grid).unwrap();
        let gu = duhamel_g(&s.kernel, &op, &u, &grid).unwrap();
        let gm = duhamel_g(&s.kernel, &op, &mix, &grid).unwrap();
        for ((a, b), m) in gv.iter().zip(&gu).zip(&gm) {
            let lin = &(a * c(w, 0.0)) + b;
            prop_assert!(lin.distance(m) <= 1e-12 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn free_scalar_mode_never_grows(alpha in 0.1f64..1.0, a in -50.0f64..50.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let s = setup(alpha);
        let op = scalar(a);
        let x = one(c(re, im));
        let grid = TimeGrid::for_alpha(3.0, 16, alpha).unwrap();
        let tr = solve_local(&s.prop, &s.kernel, &op, &x, &NonlinearitySpec::Zero, &grid, &PicardSettings::default()).unwrap();
        for u in &tr.states {
            prop_assert!(u.norm() <= x.norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nonlinearities_vanish_at_zero(lambda in -3.0f64..3.0, p in 1.0f64..5.0, m in 1u32..4) {
        let op = schr(16);
        for f in [
            NonlinearitySpec::Power { lambda, lambda_im: 0.0, p },
            NonlinearitySpec::Saturating { lambda },
            NonlinearitySpec::Flux { m, coefficient: lambda },
            NonlinearitySpec::Linear { kappa: lambda },
        ] {
            prop_assert_eq!(f.eval(&op, &op.zeros()).unwrap().norm(), 0.0);
        }
    }
}
