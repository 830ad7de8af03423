//! TOML analysis configuration.
//!
//! ```toml
//! t_final = 2.0
//! thresholds = [-0.5]
//!
//! [model]
//! alpha = [{ ds = [{ lo = 0.86, hi = 0.9, mass = 0.2 }, { lo = 0.89, hi = 0.96, mass = 0.8 }] }]
//! q = { lo = 0.2, hi = 0.4 }
//! initial = { kind = "raw", m1 = 1.1, m2 = 2.42 }
//! ```
//!
//! A parameter is a number, an interval `{ lo, hi }` or a DS structure
//! `{ ds = [{ lo, hi, mass }, ...] }`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_pbox::{DEFAULT_GRID_POINTS, DEFAULT_PERCENTILE};
use crate::interval_ds::{DsStructure, Interval};
use crate::mc_oracle::{DEFAULT_BINS, DEFAULT_SAMPLES};
use crate::model::{InitialCondition, ModelTemplate, Param};
use crate::moment_dynamics::DEFAULT_DT;
use crate::pce::PropagationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalSpec {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Scalar(f64),
    Interval { lo: f64, hi: f64 },
    Evidence { ds: Vec<FocalSpec> },
}

impl ParamSpec {
    pub fn to_param(&self) -> Result<Param> {
        Ok(match self {
            ParamSpec::Scalar(x) => Param::Scalar(*x),
            ParamSpec::Interval { lo, hi } => Param::interval(*lo, *hi)?,
            ParamSpec::Evidence { ds } => {
                let items = ds
                    .iter()
                    .map(|f| Ok((Interval::new(f.lo, f.hi)?, f.mass)))
                    .collect::<Result<Vec<_>>>()?;
                Param::Evidence(DsStructure::new(items)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `m1(0) = mean`, `m2(0) = variance + mean²`.
    MeanVariance {
        mean: ParamSpec,
        variance: ParamSpec,
    },
    /// Raw moments used as given.
    Raw { m1: ParamSpec, m2: ParamSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `alpha[i]` multiplies `x^(i+1)` in the drift `−Σ alpha[i] x^(i+1)`.
    pub alpha: Vec<ParamSpec>,
    /// Noise amplitude; the moment equations use `q²`.
    pub q: ParamSpec,
    pub initial: InitialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_grid_points")]
    pub points: usize,
    /// Both ends default to the mean range padded by six standard deviations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_order")]
    pub pce_order: usize,
    /// Splits per dimension for the Bernstein enclosure.
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Lower percentile (a fraction) bounding the NIigF window.
    #[serde(default = "default_percentile")]
    pub ignorance_percentile: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub mc: McSpec,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_order() -> usize {
    3
}
fn default_subdivisions() -> usize {
    1
}
fn default_percentile() -> f64 {
    DEFAULT_PERCENTILE
}
fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_bins() -> usize {
    DEFAULT_BINS
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(config_err(format!(
                "t_final must be finite and >= 0, got {}",
                self.t_final
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(config_err(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.pce_order == 0 {
            return Err(config_err("pce_order must be >= 1"));
        }
        if self.subdivisions == 0 {
            return Err(config_err("subdivisions must be >= 1"));
        }
        if self.thresholds.is_empty() && self.grid.is_none() {
            return Err(config_err("request at least one threshold or a grid"));
        }
        if let Some(x) = self.thresholds.iter().find(|x| x.is_nan()) {
            return Err(config_err(format!("threshold {x} is not a number")));
        }
        if !(self.ignorance_percentile > 0.0 && self.ignorance_percentile < 0.5) {
            return Err(config_err(format!(
                "ignorance_percentile must lie in (0, 0.5), got {}",
                self.ignorance_percentile
            )));
        }
        if let Some(g) = &self.grid {
            if g.points < 2 {
                return Err(config_err("grid needs at least 2 points"));
            }
            let finite = |v: Option<f64>| v.is_none_or(f64::is_finite);
            if !finite(g.lo) || !finite(g.hi) {
                return Err(config_err("grid ends must be finite"));
            }
            if let (Some(lo), Some(hi)) = (g.lo, g.hi) {
                if lo >= hi {
                    return Err(config_err(format!("grid lo {lo} must be below hi {hi}")));
                }
            }
        }
        if self.mc.enabled {
            if self.mc.samples == 0 {
                return Err(config_err("mc.samples must be >= 1"));
            }
            if self.mc.bins == 0 {
                return Err(config_err("mc.bins must be >= 1"));
            }
            if self.thresholds.is_empty() {
                return Err(config_err("Monte Carlo needs at least one threshold"));
            }
        }
        self.template()?;
        Ok(())
    }

    /// The model with every parameter spec resolved; invalid evidence is a
    /// config error.
    pub fn template(&self) -> Result<ModelTemplate> {
        let resolve = |name: &str, p: &ParamSpec| {
            p.to_param().map_err(|e| config_err(format!("{name}: {e}")))
        };
        let alpha = self
            .model
            .alpha
            .iter()
            .enumerate()
            .map(|(i, p)| resolve(&format!("model.alpha[{i}]"), p))
            .collect::<Result<Vec<_>>>()?;
        let q = resolve("model.q", &self.model.q)?;
        let initial = match &self.model.initial {
            InitialSpec::MeanVariance { mean, variance } => InitialCondition::MeanVariance {
                mean: resolve("model.initial.mean", mean)?,
                variance: resolve("model.initial.variance", variance)?,
            },
            InitialSpec::Raw { m1, m2 } => InitialCondition::RawMoments {
                m1: resolve("model.initial.m1", m1)?,
                m2: resolve("model.initial.m2", m2)?,
            },
        };
        ModelTemplate::new(alpha, q, initial).map_err(|e| config_err(format!("model: {e}")))
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig {
            order: self.pce_order,
            dt: self.dt,
            subdivisions: self.subdivisions,
        }
    }
}
