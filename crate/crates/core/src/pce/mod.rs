//! Interval propagation through the moment equations with a Legendre
//! polynomial chaos surrogate and Bernstein range enclosure.

pub mod basis;
pub mod bernstein;
pub mod galerkin;
pub mod propagate;

pub use basis::PceBasis;
pub use bernstein::{bernstein_enclose, BernsteinTensor, TensorPoly};
pub use galerkin::{galerkin_rhs, init_pce, integrate_pce, ExpandedModel, PceState};
pub use propagate::{propagate_box, GaussianBox, PropagationConfig, Propagator};
