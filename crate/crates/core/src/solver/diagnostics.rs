use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nonlinearity::NonlinearitySpec;
use super::trajectory::Trajectory;
use crate::calculus::{admissibility, Admissibility};
use crate::error::{FracError, Result};
use crate::mittag_leffler::{MittagLeffler, MlConfig};
use crate::spectral::{loglog_slope, DiagonalizedOperator};

/// ε values swept by [`classify_global`].
pub const EPS_SWEEP: [f64; 3] = [0.01, 0.1, 0.5];
const SIGMA_MAX: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalRegime {
    GlobalRegime,
    BlowupPossible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalClassification {
    pub regime: GlobalRegime,
    /// One entry per swept ε; empty when `F ≡ 0`.
    pub sweep: Vec<(f64, Admissibility)>,
}

/// Global when the admissibility integral of `w` diverges for some swept ε.
/// `blowup_possible` is not a proof of blow-up.
pub fn classify_global(f: &NonlinearitySpec, alpha: f64) -> Result<GlobalClassification> {
    let Some(w) = f.growth() else {
        return Ok(GlobalClassification { regime: GlobalRegime::GlobalRegime, sweep: Vec::new() });
    };
    let sweep = EPS_SWEEP
        .iter()
        .map(|&eps| admissibility(&w, alpha, eps, SIGMA_MAX).map(|a| (eps, a)))
        .collect::<Result<Vec<_>>>()?;
    let regime = if sweep.iter().any(|(_, a)| a.is_divergent()) {
        GlobalRegime::GlobalRegime
    } else {
        GlobalRegime::BlowupPossible
    };
    Ok(GlobalClassification { regime, sweep })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceCheck {
    /// Smallest `C` satisfying the bound at every node.
    pub c_min: f64,
    pub holds: bool,
    pub ratios: Vec<f64>,
}

/// Checks `‖u(t)-v(t)‖_{D(A)} ≤ C E_{α,1}(Γ(α) t^α) ‖x-y‖_{D(A)}` node by node.
pub fn perturbed_distance_bound(
    op: &DiagonalizedOperator,
    u: &Trajectory,
    v: &Trajectory,
    c: f64,
    alpha: f64,
    cfg: &MlConfig,
) -> Result<DistanceCheck> {
    if u.nodes.len() != v.nodes.len() || u.nodes.iter().zip(&v.nodes).any(|(a, b)| (a - b).abs() > 1e-14 * a.abs().max(1.0)) {
        return Err(FracError::Grid("trajectories must share a grid".into()));
    }
    let ml = MittagLeffler::new(alpha, 1.0, *cfg)?;
    let d0 = op.graph_norm(&(&u.states[0] - &v.states[0]));
    let ga = libm::tgamma(alpha);
    let mut ratios = Vec::with_capacity(u.len());
    for ((t, a), b) in u.nodes.iter().zip(&u.states).zip(&v.states) {
        let lhs = op.graph_norm(&(a - b));
        let env = ml.eval(Complex64::new(ga * t.powf(alpha), 0.0))?.re;
        ratios.push(if lhs == 0.0 { 0.0 } else { lhs / (env * d0) });
    }
    let c_min = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(DistanceCheck { c_min, holds: c_min <= c, ratios })
}

/// Which Hölder estimate a slope is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderCase {
    /// `x ∈ D(A)`, bounded forcing: exponent `α`.
    DomainData,
    /// `L^q` forcing: exponent `1 - α`.
    LqForcing,
}

impl HolderCase {
    pub fn predicted(self, alpha: f64) -> f64 {
        match self {
            HolderCase::DomainData => alpha,
            HolderCase::LqForcing => 1.0 - alpha,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// `None` for a flat trajectory.
    pub slope: Option<f64>,
    pub pairs: usize,
    pub flat: bool,
    pub predicted: f64,
}

/// Least-squares slope of `ln ‖u(t)-u(s)‖_H` against `ln |t-s|` over node
/// pairs in `[δ, T]`: several anchors, each paired with nodes at doubling
/// index offsets.
pub fn holder_slope(traj: &Trajectory, window: (f64, f64), case: HolderCase, alpha: f64) -> Result<HolderFit> {
    let (delta, t_end) = window;
    if !(delta > 0.0 && t_end > delta) {
        return Err(FracError::invalid("Hölder window needs 0 < δ < T"));
    }
    if !traj.status.is_completed() {
        return Err(FracError::invalid("Hölder slope needs a completed trajectory"));
    }
    let idx: Vec<usize> = (0..traj.len()).filter(|&i| traj.nodes[i] >= delta && traj.nodes[i] <= t_end).collect();
    let scale = idx.iter().map(|&i| traj.states[i].norm()).fold(0.0, f64::max);
    let anchors = 6.min(idx.len());
    let mut dt = Vec::new();
    let mut du = Vec::new();
    let mut flat = true;
    for a in 0..anchors {
        let i0 = a * idx.len() / anchors.max(1);
        let mut off = 1;
        while i0 + off < idx.len() {
            let (i, j) = (idx[i0], idx[i0 + off]);
            let d = traj.states[i].distance(&traj.states[j]);
            if d > 1e-13 * scale.max(1e-300) {
                flat = false;
                dt.push(traj.nodes[j] - traj.nodes[i]);
                du.push(d);
            }
            off *= 2;
        }
    }
    let predicted = case.predicted(alpha);
    if flat {
        return Ok(HolderFit { slope: None, pairs: 0, flat: true, predicted });
    }
    if dt.len() < 8 {
        return Err(FracError::TooFewSamples { need: 8, got: dt.len() });
    }
    Ok(HolderFit { slope: Some(loglog_slope(&dt, &du)), pairs: dt.len(), flat: false, predicted })
}
