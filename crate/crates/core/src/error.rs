use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo <= hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("a box needs at least one dimension")]
    EmptyBox,

    #[error("a DS structure needs at least one focal element")]
    EmptyStructure,

    #[error("focal element {index} has non-positive or non-finite mass {mass}")]
    InvalidMass { index: usize, mass: f64 },

    #[error("masses sum to {sum}, expected 1 within {tolerance:e}")]
    MassSum { sum: f64, tolerance: f64 },

    #[error("pignistic density is atomic at x = {x} (zero-width focal element)")]
    DegenerateFocal { x: f64 },

    #[error("all focal elements collapse to the point {at}; ignorance is 0 by definition")]
    DegenerateSupport { at: f64 },

    #[error("invalid variance: m2 - m1^2 = {variance:e} (m1 = {m1}, m2 = {m2}){}", .time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    InvalidVariance {
        m1: f64,
        m2: f64,
        variance: f64,
        time: Option<f64>,
    },

    #[error("closed form needs a nonzero decay rate")]
    ZeroDecay,

    #[error("basis size {size} exceeds the cap of {cap} terms")]
    BasisTooLarge { size: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polynomial degree {degree} exceeds the supported cap of {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("variance enclosure is entirely negative: upper bound {upper:e}")]
    NegativeVariance { upper: f64 },

    #[error("percentile window is degenerate: x_min = {x_min}, x_max = {x_max}")]
    DegenerateRange { x_min: f64, x_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}`{}: {source}", .focal.map(|i| format!(" (focal element {i})")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        focal: Option<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str, focal: Option<usize>) -> Self {
        Error::Stage {
            stage,
            focal,
            source: Box::new(self),
        }
    }

    /// Innermost error behind any stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self.root(), Error::Config(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io { .. })
    }
}
