use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// Time mesh `0 = t_0 < t_1 < … < t_N = T`, possibly graded towards 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl TimeGrid {
    /// Nodes `t_j = T (j/N)^r`.
    pub fn graded(t_end: f64, intervals: usize, r: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(FracError::Grid(format!("final time must be positive, got {t_end}")));
        }
        if intervals == 0 {
            return Err(FracError::Grid("need at least one interval".into()));
        }
        if !(r >= 1.0) {
            return Err(FracError::Grid(format!("grading exponent must be >= 1, got {r}")));
        }
        let n = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|j| t_end * (j as f64 / n).powf(r)).collect();
        nodes[intervals] = t_end;
        let grid = TimeGrid { nodes, grading: r };
        grid.check()?;
        Ok(grid)
    }

    pub fn uniform(t_end: f64, intervals: usize) -> Result<Self> {
        Self::graded(t_end, intervals, 1.0)
    }

    /// Default mesh for solutions behaving like `t^α` near 0 (`r = 2/α`).
    pub fn for_alpha(t_end: f64, intervals: usize, alpha: f64) -> Result<Self> {
        Self::graded(t_end, intervals, (2.0 / alpha).max(1.0))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let grid = TimeGrid { nodes, grading: f64::NAN };
        grid.check()?;
        Ok(grid)
    }

    fn check(&self) -> Result<()> {
        if self.nodes.first() != Some(&0.0) {
            return Err(FracError::Grid("first node must be 0".into()));
        }
        if let Some(w) = self.nodes.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(FracError::Grid(format!(
                "nodes must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Grading exponent, NaN for grids built from explicit nodes.
    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Same nodes shifted by `t0`; used for continuation windows.
    pub fn shifted(&self, t0: f64) -> Vec<f64> {
        self.nodes.iter().map(|t| t + t0).collect()
    }

    /// Product-integration weights `w_j` with
    /// `∫_0^{t_n} (t_n - τ)^{α-1} u(τ) dτ = Σ_j w_j u(t_j)` for piecewise
    /// linear `u`. They are nonnegative and sum to `t_n^α / α`.
    pub fn kernel_weights(&self, alpha: f64, n: usize) -> Vec<f64> {
        let t = &self.nodes;
        let mut w = vec![0.0; n + 1];
        for j in 0..n {
            let (lw, rw) = linear_moments(alpha, t[n] - t[j], t[n] - t[j + 1]);
            w[j] += lw;
            w[j + 1] += rw;
        }
        w
    }
}

/// `∫_B^A s^{α-1} φ(s) ds` for the two hat pieces on `[B, A]`:
/// `φ = (s - B)/h` (weight of the left node `t_j`, where `s = A`) and
/// `φ = (A - s)/h` (right node).
pub(crate) fn linear_moments(alpha: f64, a: f64, b: f64) -> (f64, f64) {
    let h = a - b;
    // 1 - (B/A)^p computed without cancellation
    let l = (-h / a).ln_1p();
    let one_minus = |p: f64| -(p * l).exp_m1();
    let a_alpha = a.powf(alpha);
    let m0 = a_alpha * one_minus(alpha) / alpha;
    let m1 = a_alpha * a * one_minus(alpha + 1.0) / (alpha + 1.0);
    let left = ((m1 - b * m0) / h).max(0.0);
    let right = ((a * m0 - m1) / h).max(0.0);
    (left, right)
}

/// `∫_B^A s^{-γ} ds` for `0 <= γ < 1`.
pub(crate) fn power_moment(gamma: f64, a: f64, b: f64) -> f64 {
    let p = 1.0 - gamma;
    let l = ((b - a) / a).ln_1p();
    a.powf(p) * -(p * l).exp_m1() / p
}
