use std::collections::{HashMap, HashSet};

use num_complex::Complex64;

use crate::error::{FracError, Result};
use crate::mittag_leffler::{MittagLeffler, MlConfig};
use crate::par;
use crate::spectral::StateField;

type Pair = (Complex64, Complex64);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Three-point Gauss-Legendre rule on [-1, 1].
const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Product-integration weights for `Gv(t_n) = ∫_0^{t_n} P_{t_n-τ} v(τ) dτ`.
///
/// On each interval `v` is interpolated linearly and the kernel
/// `k(σ) = σ^{α-1} E_{α,α}(iaσ^α)` is integrated exactly through
/// `Φ1(s) = ∫_0^s k = s^α E_{α,α+1}(ias^α)` and
/// `Φ2(s) = ∫_0^s σk = s^{α+1} (E_{α,α+1} - E_{α,α+2})(ias^α)`.
/// Differences of `Φ` cancel badly on intervals much shorter than their
/// distance from `t_n`; there the smooth kernel is integrated by Gauss rule.
#[derive(Clone, Debug)]
pub struct DuhamelKernel {
    alpha: f64,
    e0: MittagLeffler,
    e1: MittagLeffler,
    e2: MittagLeffler,
}

impl DuhamelKernel {
    pub fn new(alpha: f64, cfg: MlConfig) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(FracError::invalid(format!("Duhamel kernel needs 0 < alpha <= 1, got {alpha}")));
        }
        Ok(DuhamelKernel {
            alpha,
            e0: MittagLeffler::new(alpha, alpha, cfg)?,
            e1: MittagLeffler::new(alpha, alpha + 1.0, cfg)?,
            e2: MittagLeffler::new(alpha, alpha + 2.0, cfg)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn phi(&self, a: f64, s: f64) -> Result<Pair> {
        if s <= 0.0 {
            return Ok((ZERO, ZERO));
        }
        let sa = s.powf(self.alpha);
        let z = Complex64::new(0.0, a * sa);
        let e1 = self.e1.eval(z)?;
        let e2 = self.e2.eval(z)?;
        Ok((e1 * sa, (e1 - e2) * (sa * s)))
    }

    /// `(∫ k, ∫ k (B-σ)/h)` over `σ ∈ [lo, lo + h]`, with `B = lo + h`.
    /// `phis` caches `Φ(lo)` and `Φ(B)` for the moment formula.
    fn interval(&self, a: f64, lo: f64, h: f64, phis: (&mut Option<Pair>, &mut Option<Pair>)) -> Result<Pair> {
        let b = lo + h;
        let smooth = lo > 0.0 && h <= 1e-3 * b && h * a.abs() * self.alpha * lo.powf(self.alpha - 1.0) <= 1e-2;
        if smooth {
            let (mut m0, mut r) = (ZERO, ZERO);
            for (x, w) in GL3 {
                let s = lo + 0.5 * h * (x + 1.0);
                let sa = s.powf(self.alpha);
                let k = self.e0.eval(Complex64::new(0.0, a * sa))? * (sa / s) * (0.5 * h * w);
                m0 += k;
                r += k * ((b - s) / h);
            }
            return Ok((m0, r));
        }
        let pa = match phis.0 {
            Some(p) => *p,
            None => *phis.0.insert(self.phi(a, lo)?),
        };
        let pb = match phis.1 {
            Some(p) => *p,
            None => *phis.1.insert(self.phi(a, b)?),
        };
        let m0 = pb.0 - pa.0;
        let m1 = pb.1 - pa.1;
        Ok((m0, (m0 * b - m1) / h))
    }

    /// Weights of row `n`: entry `j * modes + k` multiplies `v_j` on mode `k`.
    pub fn row(&self, nodes: &[f64], n: usize, eigenvalues: &[f64]) -> Result<Vec<Complex64>> {
        let modes = eigenvalues.len();
        let mut w = vec![ZERO; (n + 1) * modes];
        self.direct_intervals(nodes, n, n, eigenvalues, &mut w)?;
        Ok(w)
    }

    /// Adds the contributions of intervals `0..upto` of row `n` into `w`.
    fn direct_intervals(&self, nodes: &[f64], n: usize, upto: usize, eigenvalues: &[f64], w: &mut [Complex64]) -> Result<()> {
        let modes = eigenvalues.len();
        let tn = nodes[n];
        let mut phis: Vec<Option<Pair>> = vec![None; upto + 1];
        for (k, &a) in eigenvalues.iter().enumerate() {
            phis.iter_mut().for_each(|p| *p = None);
            for j in 0..upto {
                let h = nodes[j + 1] - nodes[j];
                let lo = tn - nodes[j + 1];
                let (left, right) = phis.split_at_mut(j + 1);
                let (m0, r) = self
                    .interval(a, lo, h, (&mut right[0], &mut left[j]))
                    .map_err(|e| e.at_mode(k))?;
                w[j * modes + k] += m0 - r;
                w[(j + 1) * modes + k] += r;
            }
        }
        Ok(())
    }

    /// Rows `from..nodes.len()`, computed in parallel.
    pub fn rows(&self, nodes: &[f64], from: usize, eigenvalues: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        par::try_map(nodes.len() - from, |r| self.row(nodes, from + r, eigenvalues))
    }

    /// Like [`rows`](Self::rows), but intervals starting at node
    /// `cache_from` or later are looked up by their exact `(σ_lo, h)` in
    /// `cache`. On meshes built from dyadic windows these repeat exactly.
    pub(crate) fn rows_cached(
        &self,
        nodes: &[f64],
        from: usize,
        eigenvalues: &[f64],
        cache: &mut IntervalCache,
        cache_from: usize,
    ) -> Result<Vec<Vec<Complex64>>> {
        let modes = eigenvalues.len();
        let key = |n: usize, j: usize| ((nodes[n] - nodes[j + 1]).to_bits(), (nodes[j + 1] - nodes[j]).to_bits());
        let mut needed = Vec::new();
        let mut seen = HashSet::new();
        for n in from..nodes.len() {
            for j in cache_from.min(n)..n {
                let kk = key(n, j);
                if seen.insert(kk) {
                    needed.push(kk);
                }
            }
        }
        let mut missing: Vec<(u64, u64)> = needed.iter().copied().filter(|kk| !cache.map.contains_key(kk)).collect();
        // reset before computing, so every key this call needs stays present
        if (cache.len() + missing.len()) * modes > cache.limit {
            cache.clear();
            missing = needed;
        }
        let fresh = par::try_map(missing.len(), |i| {
            let (lo, h) = (f64::from_bits(missing[i].0), f64::from_bits(missing[i].1));
            eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &a)| self.interval(a, lo, h, (&mut None, &mut None)).map_err(|e| e.at_mode(k)))
                .collect::<Result<Vec<_>>>()
        })?;
        for (kk, v) in missing.into_iter().zip(fresh) {
            cache.insert(kk, v);
        }
        let cache = &*cache;
        par::try_map(nodes.len() - from, |r| {
            let n = from + r;
            let mut w = vec![ZERO; (n + 1) * modes];
            let upto = cache_from.min(n);
            self.direct_intervals(nodes, n, upto, eigenvalues, &mut w)?;
            for j in upto..n {
                let v = cache.get(key(n, j)).expect("filled above");
                for (k, &(m0, r)) in v.iter().enumerate() {
                    w[j * modes + k] += m0 - r;
                    w[(j + 1) * modes + k] += r;
                }
            }
            Ok(w)
        })
    }
}

/// Interval moments keyed by exact `(σ_lo, h)` bit patterns.
pub(crate) struct IntervalCache {
    map: HashMap<(u64, u64), usize>,
    data: Vec<Vec<Pair>>,
    /// Upper bound on stored `(entry, mode)` pairs before the cache resets.
    limit: usize,
}

impl IntervalCache {
    pub(crate) fn new(limit: usize) -> Self {
        IntervalCache { map: HashMap::new(), data: Vec::new(), limit }
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    fn clear(&mut self) {
        self.map.clear();
        self.data.clear();
    }

    fn insert(&mut self, key: (u64, u64), v: Vec<Pair>) {
        self.map.insert(key, self.data.len());
        self.data.push(v);
    }

    fn get(&self, key: (u64, u64)) -> Option<&[Pair]> {
        self.map.get(&key).map(|&i| self.data[i].as_slice())
    }
}

/// `Σ_{j in cols} w[j] v_j` for one row.
pub(crate) fn accumulate(row: &[Complex64], v: &[StateField], cols: std::ops::Range<usize>, out: &mut [Complex64]) {
    let modes = out.len();
    for j in cols {
        let wj = &row[j * modes..(j + 1) * modes];
        for ((o, w), c) in out.iter_mut().zip(wj).zip(v[j].coeffs()) {
            *o += w * c;
        }
    }
}
