use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::mittag_leffler::MlConfig;
use crate::solver::{ContinuationSettings, HolderCase, NonlinearitySpec};
use crate::spectral::io::{read_potential_csv, OperatorDoc};
use crate::spectral::{random_field, DiagonalizedOperator, Potential, StateField, SymbolSpec, DENSE_CAP};

/// Version of the sidecar and config layout.
pub const SCHEMA_VERSION: u32 = 1;

/// What a sweep point computes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunMode {
    /// `u = S_t x + i G F(t)` for the configured forcing.
    Linear,
    /// One Picard solve on a graded grid over the whole horizon.
    Local,
    /// Windowed continuation with blow-up detection.
    Continuation,
    /// Error table over the horizon list for constant forcing.
    SteadyState,
    /// Error table over the ε list for `i D^α u + εAu + F = 0`.
    VanishingOperator,
    /// Error table over the ε list for `i ε D^α u + Au + F = 0`, on `[δ, T]`.
    StiffLimit { delta: f64 },
}

impl RunMode {
    pub fn is_table(&self) -> bool {
        matches!(self, RunMode::SteadyState | RunMode::VanishingOperator | RunMode::StiffLimit { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    #[default]
    None,
    /// `q(x) = q Σ_axes cos(2π x_i / L)` on the grid, `V(x) = v`.
    Trig { q: f64, v: f64 },
    /// CSV with columns `x,q,V`, one row per grid point.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorConfig {
    Torus {
        symbol: SymbolSpec,
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "L", default = "two_pi")]
        l: f64,
        #[serde(default)]
        potential: PotentialConfig,
    },
    /// One mode with eigenvalue `a`.
    Scalar { a: f64 },
    /// An operator JSON document.
    Document { path: PathBuf },
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl OperatorConfig {
    pub fn build(&self) -> Result<DiagonalizedOperator> {
        match self {
            OperatorConfig::Scalar { a } => {
                DiagonalizedOperator::from_hermitian(nalgebra::DMatrix::from_element(1, 1, Complex64::new(*a, 0.0)))
            }
            OperatorConfig::Document { path } => OperatorDoc::read(path)?.build(),
            OperatorConfig::Torus { symbol, n, l, potential } => {
                let potential = match potential {
                    PotentialConfig::None => return DiagonalizedOperator::build_diagonal(symbol.clone(), *n, *l),
                    PotentialConfig::Trig { q, v } => trig_potential(symbol.dim(), *n, *q, *v),
                    PotentialConfig::File { path } => read_potential_csv(path)?.1,
                };
                let modes = n.pow(symbol.dim() as u32);
                if modes > DENSE_CAP {
                    return Err(FracError::invalid(format!(
                        "a potential needs the dense path, limited to {DENSE_CAP} grid points; N^dim = {modes}"
                    )));
                }
                DiagonalizedOperator::build_perturbed(symbol.clone(), potential, *n, *l)
            }
        }
    }
}

fn trig_potential(dim: usize, n: usize, q: f64, v: f64) -> Potential {
    let c: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
    let qv: Vec<f64> = match dim {
        1 => c.iter().map(|x| q * x).collect(),
        _ => c.iter().flat_map(|y| c.iter().map(move |x| q * (x + y))).collect(),
    };
    Potential { v: vec![v; qv.len()], q: qv }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// Random field with spectrum `(1+|ξ|)^{-decay}`, scaled to H-norm `amplitude`.
    Random { amplitude: f64, decay: f64 },
    /// `amplitude` on mode `k` (basis order).
    Mode { k: usize, amplitude: f64 },
    /// The same coefficient on every mode.
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl InitialData {
    pub fn build(&self, op: &DiagonalizedOperator, seed: u64) -> Result<StateField> {
        Ok(match *self {
            InitialData::Random { amplitude, decay } => &unit_field(op, seed, 0, decay) * Complex64::new(amplitude, 0.0),
            InitialData::Mode { k, amplitude } => {
                if k >= op.modes() {
                    return Err(FracError::invalid(format!("mode {k} out of range for {} modes", op.modes())));
                }
                StateField::mode(op.modes(), k, Complex64::new(amplitude, 0.0))
            }
            InitialData::Constant { re, im } => StateField::new(vec![Complex64::new(re, im); op.modes()]),
        })
    }

    pub fn scale(&mut self, factor: f64) {
        match self {
            InitialData::Random { amplitude, .. } | InitialData::Mode { amplitude, .. } => *amplitude *= factor,
            InitialData::Constant { re, im } => {
                *re *= factor;
                *im *= factor;
            }
        }
    }

    pub fn set_amplitude(&mut self, value: f64) {
        match self {
            InitialData::Random { amplitude, .. } | InitialData::Mode { amplitude, .. } => *amplitude = value,
            InitialData::Constant { re, im } => {
                *re = value;
                *im = 0.0;
            }
        }
    }
}

fn unit_field(op: &DiagonalizedOperator, seed: u64, sample: u64, decay: f64) -> StateField {
    if op.modes() == 1 {
        return StateField::new(vec![Complex64::new(1.0, 0.0)]);
    }
    let f = random_field(op, seed, sample, decay);
    let n = f.norm();
    &f * Complex64::new(1.0 / n, 0.0)
}

/// External forcing `F(t) = amplitude g(t) f0`; `f0` is a unit random field
/// (or 1 on a scalar operator).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingConfig {
    #[default]
    None,
    Constant { amplitude: f64 },
    Sine { amplitude: f64 },
    /// `|t - t_c|^{-0.9/q}`: in `L^q` but unbounded.
    Singular { amplitude: f64, q: f64, t_c: f64 },
}

impl ForcingConfig {
    pub fn is_none(&self) -> bool {
        matches!(self, ForcingConfig::None)
    }

    /// The scalar time profile `amplitude g(t)`.
    pub fn profile(&self) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let cfg = self.clone();
        move |t: f64| match cfg {
            ForcingConfig::None => 0.0,
            ForcingConfig::Constant { amplitude } => amplitude,
            ForcingConfig::Sine { amplitude } => amplitude * t.sin(),
            ForcingConfig::Singular { amplitude, q, t_c } => {
                let d = (t - t_c).abs().max(1e-12 * t_c.abs().max(1.0));
                amplitude * d.powf(-0.9 / q)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ForcingConfig::Singular { q, .. } if !(q > 1.0) => Err(FracError::invalid("singular forcing needs q > 1")),
            _ => Ok(()),
        }
    }

    pub fn shape(&self, op: &DiagonalizedOperator, seed: u64) -> StateField {
        unit_field(op, seed, 1, 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderConfig {
    /// Window `[δ, T]` with `T` the horizon.
    pub delta: f64,
    pub case: HolderCase,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSpace {
    /// Basis coefficients, `mode_or_gridpoint` is the mode index.
    #[default]
    Modes,
    /// Point values `u(x_j)` on the collocation grid.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub space: OutputSpace,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("fracprop-out"), space: OutputSpace::Modes }
    }
}

/// A fully resolved experiment. Sweep points are the Cartesian product of
/// the `alpha`, `epsilon` and `horizon` lists, except that table modes use
/// one of the lists as the table parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub experiment: String,
    pub mode: RunMode,
    pub alpha: Vec<f64>,
    /// Operator scale factors `A -> εA` for trajectory modes, table
    /// parameters for `vanishing_operator` and `stiff_limit`.
    #[serde(default = "unit_list")]
    pub epsilon: Vec<f64>,
    pub horizon: Vec<f64>,
    pub operator: OperatorConfig,
    #[serde(default = "zero_f")]
    pub nonlinearity: NonlinearitySpec,
    pub initial: InitialData,
    #[serde(default)]
    pub forcing: ForcingConfig,
    /// Graded-grid intervals for the linear, local and table modes.
    #[serde(default = "default_intervals")]
    pub intervals: usize,
    #[serde(default)]
    pub solver: ContinuationSettings,
    #[serde(default)]
    pub ml: MlConfig,
    #[serde(default)]
    pub holder: Option<HolderConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}

fn unit_list() -> Vec<f64> {
    vec![1.0]
}

fn zero_f() -> NonlinearitySpec {
    NonlinearitySpec::Zero
}

fn default_intervals() -> usize {
    128
}

fn default_seed() -> u64 {
    7
}

/// One point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub alpha: f64,
    /// `None` when ε is the table parameter.
    pub epsilon: Option<f64>,
    /// `None` when the horizon is the table parameter.
    pub horizon: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FracError::invalid(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.experiment.is_empty() || self.experiment.contains(['/', '\\']) {
            return Err(FracError::invalid("experiment name must be a nonempty file-name component"));
        }
        for (name, list) in [("alpha", &self.alpha), ("epsilon", &self.epsilon), ("horizon", &self.horizon)] {
            if list.is_empty() {
                return Err(FracError::invalid(format!("sweep list `{name}` is empty")));
            }
            if list.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(FracError::invalid(format!("sweep list `{name}` must hold positive numbers")));
            }
        }
        if self.alpha.iter().any(|a| *a > 1.0) {
            return Err(FracError::invalid("alpha must lie in (0, 1]"));
        }
        if self.intervals < 2 {
            return Err(FracError::invalid("intervals must be at least 2"));
        }
        self.forcing.validate()?;
        let needs_forcing = matches!(self.mode, RunMode::SteadyState);
        if needs_forcing && !matches!(self.forcing, ForcingConfig::Constant { .. }) {
            return Err(FracError::invalid("steady_state needs constant forcing"));
        }
        let nonlinear = matches!(self.mode, RunMode::Local | RunMode::Continuation);
        if nonlinear && !self.forcing.is_none() {
            return Err(FracError::invalid("external forcing is only supported by the linear and table modes"));
        }
        if !nonlinear && !self.nonlinearity.is_zero() {
            return Err(FracError::invalid(format!("mode {:?} ignores the nonlinearity; use local or continuation", self.mode)));
        }
        if let RunMode::StiffLimit { delta } = self.mode {
            if !(delta > 0.0 && self.horizon.iter().all(|t| *t > delta)) {
                return Err(FracError::invalid("stiff_limit needs 0 < delta < horizon"));
            }
        }
        if let Some(h) = self.holder {
            if !(h.delta > 0.0 && self.horizon.iter().all(|t| *t > h.delta)) {
                return Err(FracError::invalid("Hölder window needs 0 < delta < horizon"));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let eps: Vec<Option<f64>> = match self.mode {
            RunMode::VanishingOperator | RunMode::StiffLimit { .. } => vec![None],
            _ => self.epsilon.iter().map(|&e| Some(e)).collect(),
        };
        let horizons: Vec<Option<f64>> = match self.mode {
            RunMode::SteadyState => vec![None],
            _ => self.horizon.iter().map(|&h| Some(h)).collect(),
        };
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &epsilon in &eps {
                for &horizon in &horizons {
                    out.push(SweepPoint { index: out.len(), alpha, epsilon, horizon });
                }
            }
        }
        out
    }

    /// Reads a config, or the config embedded in a sidecar diagnostics file.
    pub fn read(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let cfg = match value.get("config") {
            Some(inner) if value.get("point").is_some() => serde_json::from_value(inner.clone())?,
            _ => serde_json::from_value(value)?,
        };
        Ok(cfg)
    }
}

/// Built-in presets with a one-line description.
pub const PRESETS: [(&str, &str); 12] = [
    ("linear-free", "free linear evolution of a random field on the 1-D torus"),
    ("steady-state", "constant forcing with A = -Δ + 1: ‖u(T) + A⁻¹F₀‖ over growing T"),
    ("fnls", "space-time fractional NLS with potential, λ|u|^{p-1}u"),
    ("gkdv", "time-fractional modified KdV: Airy symbol with u² u_x flux"),
    ("mbo", "time-fractional modified Benjamin-Ono: ξ|ξ| symbol with u² u_x flux"),
    ("linear-kappa", "linear term κu solved by one Picard iteration on a graded grid"),
    ("saturating", "bounded nonlinearity λu/(1+|u|²) over a long horizon"),
    ("cubic-blowup", "scalar gain cubic D^α u = u³: finite-time blow-up"),
    ("vanishing", "vanishing operator εA: distance to x + i I^α F"),
    ("stiff", "stiff limit on a scalar mode: distance to -A⁻¹F(t)"),
    ("holder", "Hölder slope of a linear solution with bounded forcing"),
    ("lq-forcing", "Hölder slope with L^q but unbounded forcing"),
];

fn torus(symbol: SymbolSpec, n: usize, potential: PotentialConfig) -> OperatorConfig {
    OperatorConfig::Torus { symbol, n, l: 2.0 * PI, potential }
}

fn schr() -> SymbolSpec {
    SymbolSpec::Schrodinger { dim: 1 }
}

const EPS_TABLE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

pub fn preset(name: &str) -> Result<RunConfig> {
    let base = |mode: RunMode, operator: OperatorConfig, initial: InitialData| RunConfig {
        schema_version: SCHEMA_VERSION,
        experiment: name.to_string(),
        mode,
        alpha: vec![0.6],
        epsilon: vec![1.0],
        horizon: vec![1.0],
        operator,
        nonlinearity: NonlinearitySpec::Zero,
        initial,
        forcing: ForcingConfig::None,
        intervals: default_intervals(),
        solver: ContinuationSettings::default(),
        ml: MlConfig::default(),
        holder: None,
        output: OutputConfig { dir: PathBuf::from("fracprop-out").join(name), space: OutputSpace::Modes },
        seed: default_seed(),
    };
    let random = |amplitude, decay| InitialData::Random { amplitude, decay };
    let cfg = match name {
        "linear-free" => RunConfig { alpha: vec![0.5], ..base(RunMode::Linear, torus(schr(), 64, PotentialConfig::None), random(1.0, 2.0)) },
        "steady-state" => RunConfig {
            alpha: vec![0.7],
            horizon: vec![5.0, 10.0, 20.0, 40.0],
            forcing: ForcingConfig::Constant { amplitude: 1.0 },
            intervals: 256,
            ..base(RunMode::SteadyState, torus(schr(), 16, PotentialConfig::Trig { q: 0.0, v: 1.0 }), random(1.0, 2.0))
        },
        "fnls" => RunConfig {
            horizon: vec![2.0],
            nonlinearity: NonlinearitySpec::Power { lambda: 1.0, lambda_im: 0.0, p: 3.0 },
            ..base(
                RunMode::Continuation,
                torus(SymbolSpec::FractionalLaplacian { beta: 0.75, dim: 1 }, 32, PotentialConfig::Trig { q: 0.5, v: 0.2 }),
                random(0.5, 2.0),
            )
        },
        "gkdv" => RunConfig {
            alpha: vec![0.7],
            nonlinearity: NonlinearitySpec::Flux { m: 2, coefficient: 1.0 },
            ..base(RunMode::Continuation, torus(SymbolSpec::Airy, 64, PotentialConfig::None), random(0.5, 2.0))
        },
        "mbo" => RunConfig {
            alpha: vec![0.7],
            nonlinearity: NonlinearitySpec::Flux { m: 2, coefficient: 1.0 },
            ..base(RunMode::Continuation, torus(SymbolSpec::BenjaminOno, 64, PotentialConfig::None), random(0.5, 2.0))
        },
        "linear-kappa" => RunConfig {
            alpha: vec![0.7],
            nonlinearity: NonlinearitySpec::Linear { kappa: 0.3 },
            intervals: 64,
            ..base(RunMode::Local, torus(schr(), 8, PotentialConfig::None), random(1.0, 2.0))
        },
        "saturating" => RunConfig {
            horizon: vec![50.0],
            nonlinearity: NonlinearitySpec::Saturating { lambda: 1.0 },
            ..base(RunMode::Continuation, torus(schr(), 8, PotentialConfig::None), random(3.0, 1.0))
        },
        "cubic-blowup" => {
            let mut cfg = RunConfig {
                horizon: vec![10.0],
                nonlinearity: NonlinearitySpec::Power { lambda: 0.0, lambda_im: -1.0, p: 3.0 },
                ..base(RunMode::Continuation, OperatorConfig::Scalar { a: 0.0 }, InitialData::Constant { re: 2.0, im: 0.0 })
            };
            cfg.solver.blowup_threshold = 1e3;
            cfg.solver.policy.floor = 1e-12;
            cfg
        }
        "vanishing" => RunConfig {
            epsilon: EPS_TABLE.to_vec(),
            forcing: ForcingConfig::Constant { amplitude: 1.0 },
            intervals: 64,
            ..base(RunMode::VanishingOperator, torus(schr(), 16, PotentialConfig::None), random(1.0, 2.0))
        },
        "stiff" => RunConfig {
            epsilon: EPS_TABLE.to_vec(),
            horizon: vec![2.0],
            forcing: ForcingConfig::Sine { amplitude: 1.0 },
            intervals: 256,
            ..base(RunMode::StiffLimit { delta: 0.2 }, OperatorConfig::Scalar { a: 1.0 }, InitialData::Constant { re: 0.0, im: 0.0 })
        },
        "holder" => RunConfig {
            alpha: vec![0.5, 0.8],
            horizon: vec![2.0],
            forcing: ForcingConfig::Constant { amplitude: 1.0 },
            intervals: 256,
            holder: Some(HolderConfig { delta: 0.1, case: HolderCase::DomainData }),
            ..base(RunMode::Linear, torus(schr(), 16, PotentialConfig::None), random(1.0, 3.0))
        },
        "lq-forcing" => RunConfig {
            alpha: vec![0.8],
            horizon: vec![2.0],
            forcing: ForcingConfig::Singular { amplitude: 1.0, q: 10.0, t_c: 1.0 },
            intervals: 256,
            holder: Some(HolderConfig { delta: 0.1, case: HolderCase::LqForcing }),
            ..base(RunMode::Linear, torus(schr(), 16, PotentialConfig::None), random(1.0, 3.0))
        },
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(FracError::invalid(format!("unknown preset `{other}`; known presets: {}", names.join(", "))));
        }
    };
    Ok(cfg)
}
