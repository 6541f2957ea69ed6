use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series branch cannot reach |z| = {modulus}: {reason}")]
    SeriesNonConvergence { modulus: f64, reason: String },

    #[error("arg z = {arg} lies outside the asymptotic sector |arg z| >= {mu}")]
    OutsideSector { arg: f64, mu: f64 },

    #[error("no Mittag-Leffler branch supports alpha = {alpha}, z = {re}{im:+}i")]
    UnsupportedRegion { alpha: f64, re: f64, im: f64 },

    #[error("mode {mode}: {source}")]
    Mode {
        mode: usize,
        #[source]
        source: Box<FracError>,
    },

    #[error("time grid: {0}")]
    Grid(String),

    #[error("growth function: {0}")]
    Growth(String),

    #[error("operator is not Hermitian (residue {residue:e} > {tol:e})")]
    NonHermitian { residue: f64, tol: f64 },

    #[error("operator is not injective (min |a_k| = {min_abs:e})")]
    NotInjective { min_abs: f64 },

    #[error("symbol growth m = {m} must exceed n/2 = {half_dim}")]
    GrowthHypothesis { m: f64, half_dim: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("too few samples: need {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

impl FracError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FracError::InvalidParameter(msg.into())
    }

    pub(crate) fn at_mode(self, mode: usize) -> Self {
        FracError::Mode {
            mode,
            source: Box::new(self),
        }
    }
}
