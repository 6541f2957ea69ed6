use fracprop::calculus::*;
use fracprop::mittag_leffler::{MittagLeffler, MlConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn cplx(v: impl IntoIterator<Item = f64>) -> Vec<Complex64> {
    v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
}

/// Adaptive Simpson, used only as an independent reference.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `I^α f(t)` by the substitution `t - τ = s^{1/α}`, which removes the
/// kernel singularity: `(1/(αΓ(α))) ∫_0^{t^α} f(t - s^{1/α}) ds`.
fn rl_reference(alpha: f64, f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let g = |s: f64| f(t - s.powf(1.0 / alpha));
    simpson(&g, 0.0, t.powf(alpha), 1e-14) / (alpha * libm::tgamma(alpha))
}

#[test]
fn rl_integral_of_identity() {
    // reference value of ∫_0^1 (1-τ)^{-1/2} τ dτ / Γ(1/2), frozen from rl_reference
    const FROZEN: f64 = 0.7522527780636751;
    let oracle = rl_reference(0.5, |t| t, 1.0);
    assert!((oracle - FROZEN).abs() < 1e-13, "{oracle}");
    let g = TimeGrid::graded(1.0, 10, 2.0).unwrap();
    let i = rl_integral(0.5, &g, &cplx(g.nodes().to_vec())).unwrap();
    assert!((i[10].re - FROZEN).abs() < 1e-14, "{}", i[10].re);
}

#[test]
fn rl_integral_smooth_data_converges() {
    let f = |t: f64| (2.0 * t).sin();
    let oracle = rl_reference(0.3, f, 1.5);
    let mut errs = vec![];
    for n in [32, 64, 128] {
        let g = TimeGrid::uniform(1.5, n).unwrap();
        let i = rl_integral(0.3, &g, &cplx(g.nodes().iter().map(|&t| f(t)))).unwrap();
        errs.push((i[n].re - oracle).abs());
    }
    // second order for smooth data
    assert!(errs[2] < 1e-4 && errs[1] / errs[2] > 3.5, "{errs:?}");
}

#[test]
fn caputo_of_identity() {
    let g = TimeGrid::uniform(1.0, 8).unwrap();
    let want = 1.0 / libm::tgamma(1.5);
    let d = caputo_derivative(0.5, &g, &cplx(g.nodes().to_vec())).unwrap();
    assert!((d[7].re - want).abs() < 1e-13);
    // t^{1-α}/Γ(2-α) at every node
    for (k, v) in d.iter().enumerate() {
        let t = g.nodes()[k + 1];
        assert!((v.re - t.sqrt() * want).abs() < 1e-13);
    }
}

#[test]
fn caputo_eigenfunction() {
    let (alpha, lambda) = (0.6, Complex64::new(0.0, 2.0));
    let ml = MittagLeffler::new(alpha, 1.0, MlConfig::default()).unwrap();
    let mut errs = vec![];
    for n in [256, 1024] {
        let g = TimeGrid::for_alpha(1.0, n, alpha).unwrap();
        let u: Vec<Complex64> = g.nodes().iter().map(|&t| ml.eval(lambda * t.powf(alpha)).unwrap()).collect();
        let d = caputo_derivative(alpha, &g, &u).unwrap();
        // the L1 truncation error is O(1) on the first few cells where u ~ t^α;
        // compare away from the origin
        let err = d
            .iter()
            .zip(&u[1..])
            .zip(&g.nodes()[1..])
            .filter(|(_, &t)| t >= 0.1)
            .map(|((d, u), _)| (d - lambda * u).norm())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 2e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 4.0f64.powf(1.2), "{errs:?}");
}

/// Max nodal error of `I^α t^α = Γ(1+α)/Γ(1+2α) t^{2α}`.
fn integral_power_error(alpha: f64, n: usize, graded: bool) -> f64 {
    let g = if graded { TimeGrid::for_alpha(1.0, n, alpha) } else { TimeGrid::uniform(1.0, n) }.unwrap();
    let u = cplx(g.nodes().iter().map(|&t| t.powf(alpha)));
    let i = rl_integral(alpha, &g, &u).unwrap();
    let c = libm::tgamma(1.0 + alpha) / libm::tgamma(1.0 + 2.0 * alpha);
    i.iter().zip(g.nodes()).map(|(v, &t)| (v.re - c * t.powf(2.0 * alpha)).abs()).fold(0.0, f64::max)
}

fn slope(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -num / den
}

#[test]
fn graded_mesh_orders() {
    let ns = [64, 128, 256, 512];
    for &alpha in &[0.3, 0.5, 0.8] {
        let graded: Vec<f64> = ns.iter().map(|&n| integral_power_error(alpha, n, true)).collect();
        let uniform: Vec<f64> = ns.iter().map(|&n| integral_power_error(alpha, n, false)).collect();
        let (pg, pu) = (slope(&ns, &graded), slope(&ns, &uniform));
        assert!(pg >= 2.0 - alpha - 0.05, "alpha={alpha}: graded order {pg}");
        assert!(pu >= alpha - 0.05, "alpha={alpha}: uniform order {pu}");
    }
}

#[test]
fn integral_then_derivative_recovers_data() {
    let alpha = 0.4;
    let mut errs = vec![];
    for n in [100, 400] {
        let g = TimeGrid::uniform(2.0, n).unwrap();
        // caputo-compatible data: u(0) = 0, so the composition returns u - u(0) = u
        let u = cplx(g.nodes().iter().map(|&t| t * t - 0.3 * t));
        let i = rl_integral(alpha, &g, &u).unwrap();
        let d = caputo_derivative(alpha, &g, &i).unwrap();
        let err = d[..n - 1].iter().zip(&u[1..n]).map(|(d, u)| (d.re - u.re).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    // composition of the two first-order-accurate steps: O(h) or better
    assert!(errs[1] < 0.05 && errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn gronwall_frozen_value() {
    // 2 E_{0.7,1}(0.5 Γ(0.7)), series value from the extended-precision oracle
    let v = gronwall_bound(|_| 2.0, 0.5, 0.7, 1.0, &MlConfig::default()).unwrap();
    assert!((v - 2.0 * 2.228389239932484).abs() < 1e-13);
}

#[test]
fn admissibility_sigma_log_is_finite() {
    let w = GrowthFunction::sigma_log();
    let r = admissibility(&w, 0.5, 0.1, 1e8).unwrap();
    let Admissibility::Finite { value, .. } = r else { panic!("{r:?}") };
    // reference: ∫_0^L e^s/(e^s ln^e(1+e^s)) ds + tail, with the tail below
    // ∫_L^∞ s^{-e} ds since ln(1+e^s) > s
    let e = 2.1;
    let l: f64 = 60.0;
    let body = simpson(&|s: f64| (1.0 + s.exp()).ln().powf(-e) * 1.0, 0.0, l, 1e-12);
    let tail_max = l.powf(1.0 - e) / (e - 1.0);
    assert!(value >= body * 0.98 && value <= (body + tail_max) * 1.02, "{value} vs [{body}, {}]", body + tail_max);
}

#[test]
fn admissibility_examples() {
    let r = admissibility(&GrowthFunction::power(1.0), 0.7, 0.5, 100.0).unwrap();
    assert!(r.is_divergent());
    let r = admissibility(&GrowthFunction::power(2.0), 0.5, 0.1, 10.0).unwrap();
    match r {
        Admissibility::Finite { value, .. } => assert!((value - 1.0 / 2.1).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
    assert!(admissibility(&GrowthFunction::power(3.0), 0.5, 0.01, 1e6).unwrap().partial() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_weights_exact_mass(alpha in 0.05f64..1.0, r in 1.0f64..6.0, n in 2usize..200, t_end in 0.1f64..50.0) {
        let g = TimeGrid::graded(t_end, n, r).unwrap();
        for m in [1, n / 2, n] {
            let w = g.kernel_weights(alpha, m);
            let s: f64 = w.iter().sum();
            let exact = g.nodes()[m].powf(alpha) / alpha;
            prop_assert!((s - exact).abs() <= 1e-13 * exact);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn gronwall_monotone(alpha in 0.5f64..1.0, b in 0.1f64..3.0, t in 0.0f64..3.0, db in 0.0f64..1.0, dt in 0.0f64..1.0, a in 0.1f64..5.0) {
        let cfg = MlConfig::default();
        let base = gronwall_bound(|_| a, b, alpha, t, &cfg).unwrap();
        prop_assert!(gronwall_bound(|_| a, b + db, alpha, t, &cfg).unwrap() >= base * (1.0 - 1e-14));
        prop_assert!(gronwall_bound(|_| a, b, alpha, t + dt, &cfg).unwrap() >= base * (1.0 - 1e-14));
        prop_assert!(gronwall_bound(|_| a * 1.5, b, alpha, t, &cfg).unwrap() >= base);
    }

    #[test]
    fn admissibility_monotone_in_w(p in 1.0f64..3.0, dp in 0.0f64..1.0, alpha in 0.2f64..0.95, eps in 0.01f64..0.5) {
        let lo = admissibility(&GrowthFunction::power(p), alpha, eps, 1e3).unwrap();
        let hi = admissibility(&GrowthFunction::power(p + dp), alpha, eps, 1e3).unwrap();
        prop_assert!(lo.partial() >= hi.partial() * (1.0 - 1e-12));
    }
}
