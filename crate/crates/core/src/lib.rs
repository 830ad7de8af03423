//! Propagation of epistemic (Dempster-Shafer interval evidence) and aleatory
//! (Gaussian white noise) uncertainty through scalar polynomial SDEs.
//!
//! The pipeline: convolve the input evidence into boxes, push each box
//! through the Gaussian-closed moment equations with a chaos surrogate and
//! Bernstein bounds, lift every resulting mean/variance box to a Gaussian
//! p-box, then summarize with pignistic CDFs and ignorance measures. A Monte
//! Carlo estimator under the pignistic parameter law serves as a baseline.

pub mod cli;
pub mod config;
pub mod error;
pub mod gauss_pbox;
pub mod interval_ds;
pub mod mc_oracle;
pub mod model;
pub mod moment_dynamics;
pub mod ode;
pub mod pce;
pub mod report;

pub use config::AnalysisConfig;
pub use error::{Error, Result};
pub use gauss_pbox::{GaussPBox, IgnoranceCurve, PBoxSet};
pub use interval_ds::{DsStructure, Interval, IntervalBox};
pub use mc_oracle::{McConfig, McEstimate};
pub use model::{InitialCondition, ModelTemplate, Param, Slot};
pub use moment_dynamics::{MomentState, PolynomialDriftModel};
pub use pce::{GaussianBox, PropagationConfig};
pub use report::{emit, run_analysis, Report};
