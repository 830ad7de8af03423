//! Model templates whose inputs may carry interval evidence.

use std::fmt;

use crate::error::{Error, Result};
use crate::interval_ds::{DsStructure, Interval};
use crate::moment_dynamics::PolynomialDriftModel;

/// One model input: a known scalar or a body of interval evidence.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Scalar(f64),
    Evidence(DsStructure<Interval>),
}

impl Param {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(Param::Evidence(DsStructure::certain(Interval::new(
            lo, hi,
        )?)))
    }

    pub fn evidence(&self) -> Option<&DsStructure<Interval>> {
        match self {
            Param::Scalar(_) => None,
            Param::Evidence(ds) => Some(ds),
        }
    }

    /// Smallest interval that holds every admissible value.
    pub fn hull(&self) -> Interval {
        match self {
            Param::Scalar(x) => Interval::point(*x).expect("scalars are validated finite"),
            Param::Evidence(ds) => ds.support(),
        }
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Scalar(x)
    }
}

impl From<DsStructure<Interval>> for Param {
    fn from(ds: DsStructure<Interval>) -> Self {
        Param::Evidence(ds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `m₁(0) = μ₀`, `m₂(0) = σ₀² + μ₀²`.
    MeanVariance { mean: Param, variance: Param },
    /// Raw moments used as given.
    RawMoments { m1: Param, m2: Param },
}

/// Named input position of a model template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Alpha(usize),
    Q,
    Mean,
    Variance,
    M1,
    M2,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Alpha(i) => write!(f, "alpha[{}]", i + 1),
            Slot::Q => f.write_str("q"),
            Slot::Mean => f.write_str("initial mean"),
            Slot::Variance => f.write_str("initial variance"),
            Slot::M1 => f.write_str("initial m1"),
            Slot::M2 => f.write_str("initial m2"),
        }
    }
}

/// Polynomial drift model with possibly uncertain inputs. The noise entry is
/// the amplitude `q`; the moment equations use `q²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    pub alpha: Vec<Param>,
    pub q: Param,
    pub initial: InitialCondition,
}

impl ModelTemplate {
    pub fn new(alpha: Vec<Param>, q: Param, initial: InitialCondition) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument(
                "drift needs at least one coefficient".into(),
            ));
        }
        let template = Self { alpha, q, initial };
        for slot in template.slots() {
            if let Some(Param::Scalar(x)) = template.param(slot) {
                if !x.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "{slot} must be finite, got {x}"
                    )));
                }
            }
        }
        if template.q.hull().lo() < 0.0 {
            return Err(Error::InvalidArgument(
                "noise amplitude q must be non-negative".into(),
            ));
        }
        if let Some(v) = template.param(Slot::Variance) {
            if v.hull().lo() < 0.0 {
                return Err(Error::InvalidArgument(
                    "initial variance must be non-negative".into(),
                ));
            }
        }
        Ok(template)
    }

    pub fn param(&self, slot: Slot) -> Option<&Param> {
        match (slot, &self.initial) {
            (Slot::Alpha(i), _) => self.alpha.get(i),
            (Slot::Q, _) => Some(&self.q),
            (Slot::Mean, InitialCondition::MeanVariance { mean, .. }) => Some(mean),
            (Slot::Variance, InitialCondition::MeanVariance { variance, .. }) => Some(variance),
            (Slot::M1, InitialCondition::RawMoments { m1, .. }) => Some(m1),
            (Slot::M2, InitialCondition::RawMoments { m2, .. }) => Some(m2),
            _ => None,
        }
    }

    /// Every input position, in canonical order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots: Vec<Slot> = (0..self.alpha.len()).map(Slot::Alpha).collect();
        slots.push(Slot::Q);
        match self.initial {
            InitialCondition::MeanVariance { .. } => slots.extend([Slot::Mean, Slot::Variance]),
            InitialCondition::RawMoments { .. } => slots.extend([Slot::M1, Slot::M2]),
        }
        slots
    }

    /// Inputs carrying evidence, in the order they become box coordinates.
    pub fn epistemic(&self) -> Vec<(Slot, &DsStructure<Interval>)> {
        self.slots()
            .into_iter()
            .filter_map(|s| self.param(s).and_then(Param::evidence).map(|ds| (s, ds)))
            .collect()
    }

    pub fn is_linear(&self) -> bool {
        self.alpha.len() == 1
    }

    /// Concrete model with the epistemic inputs set to `values` (one per
    /// entry of [`ModelTemplate::epistemic`]).
    pub fn instantiate(&self, values: &[f64]) -> Result<PolynomialDriftModel> {
        let epistemic: Vec<Slot> = self.epistemic().into_iter().map(|(s, _)| s).collect();
        if values.len() != epistemic.len() {
            return Err(Error::DimensionMismatch {
                expected: epistemic.len(),
                got: values.len(),
            });
        }
        let value = |slot: Slot| -> f64 {
            match self.param(slot) {
                Some(Param::Scalar(x)) => *x,
                _ => {
                    values[epistemic
                        .iter()
                        .position(|s| *s == slot)
                        .expect("epistemic slot")]
                }
            }
        };
        let alpha = (0..self.alpha.len())
            .map(|i| value(Slot::Alpha(i)))
            .collect();
        let q = value(Slot::Q);
        match self.initial {
            InitialCondition::MeanVariance { .. } => PolynomialDriftModel::from_mean_variance(
                alpha,
                q * q,
                value(Slot::Mean),
                value(Slot::Variance),
            ),
            InitialCondition::RawMoments { .. } => {
                PolynomialDriftModel::new(alpha, q * q, value(Slot::M1), value(Slot::M2))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(items: &[(f64, f64, f64)]) -> DsStructure<Interval> {
        DsStructure::new(
            items
                .iter()
                .map(|&(l, h, m)| (Interval::new(l, h).unwrap(), m))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn epistemic_order_and_instantiation() {
        let t = ModelTemplate::new(
            vec![ds(&[(0.86, 0.9, 0.2), (0.89, 0.96, 0.8)]).into()],
            ds(&[(0.2, 0.3, 0.6), (0.3, 0.4, 0.4)]).into(),
            InitialCondition::RawMoments {
                m1: 1.1.into(),
                m2: 2.42.into(),
            },
        )
        .unwrap();
        let slots: Vec<Slot> = t.epistemic().iter().map(|(s, _)| *s).collect();
        assert_eq!(slots, vec![Slot::Alpha(0), Slot::Q]);
        let m = t.instantiate(&[0.9, 0.3]).unwrap();
        assert_eq!(m.alpha(), &[0.9]);
        assert!((m.q_sq() - 0.09).abs() < 1e-15);
        assert_eq!(m.initial_state().m2, 2.42);
        assert!(t.instantiate(&[0.9]).is_err());
    }

    #[test]
    fn mean_variance_initial_condition() {
        let t = ModelTemplate::new(
            vec![0.5.into()],
            0.1.into(),
            InitialCondition::MeanVariance {
                mean: Param::interval(1.0, 1.2).unwrap(),
                variance: 0.5.into(),
            },
        )
        .unwrap();
        assert_eq!(t.epistemic().len(), 1);
        let m = t.instantiate(&[1.2]).unwrap();
        assert!((m.initial_state().m2 - (0.5 + 1.44)).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_noise() {
        assert!(ModelTemplate::new(
            vec![1.0.into()],
            Param::interval(-0.1, 0.2).unwrap(),
            InitialCondition::RawMoments {
                m1: 0.0.into(),
                m2: 1.0.into()
            }
        )
        .is_err());
    }
}
