//! Propagation of one epistemic box to interval bounds on the final mean and
//! variance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_ds::Interval;
use crate::model::ModelTemplate;
use crate::moment_dynamics::{integrate_moments, DEFAULT_DT};
use crate::pce::basis::PceBasis;
use crate::pce::bernstein::{enclose_on_reference_box, TensorPoly};
use crate::pce::galerkin::{init_pce, integrate_pce};

/// Interval-valued mean and variance of a conditional Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianBox {
    pub mu: Interval,
    pub sigma_sq: Interval,
}

impl GaussianBox {
    pub fn new(mu: Interval, sigma_sq: Interval) -> Result<Self> {
        if sigma_sq.lo() < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "variance interval {sigma_sq} has a negative lower end"
            )));
        }
        Ok(Self { mu, sigma_sq })
    }

    /// A single Gaussian.
    pub fn point(mu: f64, sigma_sq: f64) -> Result<Self> {
        Self::new(Interval::point(mu)?, Interval::point(sigma_sq)?)
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let (m, s) = (self.mu, self.sigma_sq);
        [
            (m.lo(), s.lo()),
            (m.hi(), s.lo()),
            (m.lo(), s.hi()),
            (m.hi(), s.hi()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub order: usize,
    pub dt: f64,
    /// Equal splits per dimension for the Bernstein enclosure; 1 disables.
    pub subdivisions: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            order: 3,
            dt: DEFAULT_DT,
            subdivisions: 1,
        }
    }
}

/// Shared basis plus template; propagates any number of boxes of the
/// template's epistemic dimension.
#[derive(Debug, Clone)]
pub struct Propagator {
    template: ModelTemplate,
    basis: Option<PceBasis>,
    config: PropagationConfig,
}

impl Propagator {
    pub fn new(template: ModelTemplate, config: PropagationConfig) -> Result<Self> {
        let r = template.epistemic().len();
        let basis = if r == 0 {
            None
        } else {
            Some(PceBasis::new(r, config.order)?)
        };
        Ok(Self {
            template,
            basis,
            config,
        })
    }

    pub fn basis(&self) -> Option<&PceBasis> {
        self.basis.as_ref()
    }

    pub fn template(&self) -> &ModelTemplate {
        &self.template
    }

    /// Bounds on `μ(t_final)` and `σ²(t_final)` over the box `dims`.
    ///
    /// The variance is bounded as the single polynomial `m₂ − m₁²` rather
    /// than by subtracting separately bounded intervals.
    pub fn propagate(&self, dims: &[Interval], t_final: f64) -> Result<GaussianBox> {
        let Some(basis) = &self.basis else {
            if !dims.is_empty() {
                return Err(Error::DimensionMismatch {
                    expected: 0,
                    got: dims.len(),
                });
            }
            let s = integrate_moments(&self.template.instantiate(&[])?, t_final, self.config.dt)?;
            return GaussianBox::point(s.mean(), s.variance());
        };
        let (state0, model) = init_pce(dims, basis, &self.template)?;
        let end = integrate_pce(&state0, basis, &model, t_final, self.config.dt)?;

        let m1 = TensorPoly::from_legendre(&end.m1, basis)?;
        let m2 = TensorPoly::from_legendre(&end.m2, basis)?;
        let variance = m2.sub(&m1.mul(&m1)?)?;

        let k = self.config.subdivisions;
        let mu = enclose_on_reference_box(&m1, k)?;
        let sigma_sq = enclose_on_reference_box(&variance, k)?;
        if sigma_sq.hi() < 0.0 {
            return Err(Error::NegativeVariance {
                upper: sigma_sq.hi(),
            });
        }
        let sigma_sq = if sigma_sq.lo() < 0.0 {
            log::warn!(
                "variance enclosure {sigma_sq} dips below zero; clamping the lower end to 0"
            );
            Interval::new(0.0, sigma_sq.hi())?
        } else {
            sigma_sq
        };
        GaussianBox::new(mu, sigma_sq)
    }
}

/// One-shot propagation; builds the basis for this call only.
pub fn propagate_box(
    dims: &[Interval],
    template: &ModelTemplate,
    t_final: f64,
    config: PropagationConfig,
) -> Result<GaussianBox> {
    Propagator::new(template.clone(), config)?.propagate(dims, t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_ds::DsStructure;
    use crate::model::{InitialCondition, Param};
    use crate::moment_dynamics::linear_exact;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn template() -> ModelTemplate {
        let e = |lo, hi| Param::Evidence(DsStructure::certain(iv(lo, hi)));
        ModelTemplate::new(
            vec![e(0.86, 0.96)],
            e(0.2, 0.4),
            InitialCondition::RawMoments {
                m1: 1.1.into(),
                m2: 2.42.into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn first_table_box() {
        let g = propagate_box(
            &[iv(0.86, 0.9), iv(0.2, 0.3)],
            &template(),
            2.0,
            PropagationConfig::default(),
        )
        .unwrap();
        let eps = 0.005;
        assert!(g.mu.lo() >= 0.1818 - eps && g.mu.hi() <= 0.1970 + eps);
        assert!(g.sigma_sq.lo() >= 0.0547 - eps && g.sigma_sq.hi() <= 0.0896 + eps);
        assert!((g.mu.lo() - 0.182).abs() <= eps && (g.mu.hi() - 0.197).abs() <= eps);
        assert!((g.sigma_sq.lo() - 0.055).abs() <= eps && (g.sigma_sq.hi() - 0.090).abs() <= eps);
    }

    #[test]
    fn last_table_box() {
        let g = propagate_box(
            &[iv(0.89, 0.96), iv(0.3, 0.4)],
            &template(),
            2.0,
            PropagationConfig::default(),
        )
        .unwrap();
        let eps = 0.005;
        assert!((g.mu.lo() - 0.161).abs() <= eps && (g.mu.hi() - 0.186).abs() <= eps);
        assert!((g.sigma_sq.lo() - 0.076).abs() <= eps && (g.sigma_sq.hi() - 0.122).abs() <= eps);
    }

    #[test]
    fn zero_width_box_collapses_onto_closed_form() {
        let g = propagate_box(
            &[iv(0.9, 0.9), iv(0.3, 0.3)],
            &template(),
            2.0,
            PropagationConfig::default(),
        )
        .unwrap();
        let exact = linear_exact(0.9, 0.09, 1.1, 2.42, 2.0).unwrap();
        assert!(g.mu.width() <= 1e-6 && g.sigma_sq.width() <= 1e-6);
        assert!((g.mu.mid() - exact.m1).abs() < 1e-8);
        assert!((g.sigma_sq.mid() - (exact.m2 - exact.m1 * exact.m1)).abs() < 1e-8);
    }

    #[test]
    fn no_epistemic_inputs() {
        let t = ModelTemplate::new(
            vec![0.9.into()],
            0.3.into(),
            InitialCondition::RawMoments {
                m1: 1.1.into(),
                m2: 2.42.into(),
            },
        )
        .unwrap();
        let g = propagate_box(&[], &t, 2.0, PropagationConfig::default()).unwrap();
        let exact = linear_exact(0.9, 0.09, 1.1, 2.42, 2.0).unwrap();
        assert!(g.mu.is_point() && (g.mu.lo() - exact.m1).abs() < 1e-9);
    }
}
