//! Scalar SDE `ẋ + Σ αᵢ xⁱ = Γ(t)` and its Gaussian-closed moment equations.
//!
//! With `φ(x) = xᵏ` the moment hierarchy reads
//! `ṁₖ = −k Σ αᵢ m_{i+k−1} + ½ k(k−1) q² m_{k−2}`. Only `m₁`, `m₂` are
//! propagated; higher raw moments come from the Gaussian with mean `m₁` and
//! variance `m₂ − m₁²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode;

/// Variance violations smaller than this are treated as roundoff and clamped.
pub const VARIANCE_TOLERANCE: f64 = 1e-10;

/// Default fixed RK4 step.
pub const DEFAULT_DT: f64 = 0.005;

/// A fully specified model: drift coefficients, noise intensity and initial
/// raw moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialDriftModel {
    alpha: Vec<f64>,
    q_sq: f64,
    m1_0: f64,
    m2_0: f64,
}

impl PolynomialDriftModel {
    /// `alpha[i]` multiplies `x^(i+1)`.
    pub fn new(alpha: Vec<f64>, q_sq: f64, m1_0: f64, m2_0: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument(
                "drift needs at least one coefficient".into(),
            ));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(
                "drift coefficients must be finite".into(),
            ));
        }
        if !(q_sq.is_finite() && q_sq >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise intensity q^2 must be finite and non-negative, got {q_sq}"
            )));
        }
        MomentState::new(m1_0, m2_0)?;
        Ok(Self {
            alpha,
            q_sq,
            m1_0,
            m2_0,
        })
    }

    /// Initial condition given as mean and variance: `m₂(0) = σ₀² + μ₀²`.
    pub fn from_mean_variance(
        alpha: Vec<f64>,
        q_sq: f64,
        mean: f64,
        variance: f64,
    ) -> Result<Self> {
        Self::new(alpha, q_sq, mean, variance + mean * mean)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn q_sq(&self) -> f64 {
        self.q_sq
    }

    pub fn initial_state(&self) -> MomentState {
        MomentState {
            m1: self.m1_0,
            m2: self.m2_0,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.alpha.len() == 1
    }
}

/// First two raw moments of the conditional Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentState {
    pub m1: f64,
    pub m2: f64,
}

impl MomentState {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        checked_variance(m1, m2, None)?;
        Ok(Self { m1, m2 })
    }

    pub fn mean(&self) -> f64 {
        self.m1
    }

    /// `m₂ − m₁²`, floored at zero.
    pub fn variance(&self) -> f64 {
        (self.m2 - self.m1 * self.m1).max(0.0)
    }
}

fn checked_variance(m1: f64, m2: f64, time: Option<f64>) -> Result<f64> {
    let variance = m2 - m1 * m1;
    if !(m1.is_finite() && m2.is_finite()) || variance < -VARIANCE_TOLERANCE {
        return Err(Error::InvalidVariance {
            m1,
            m2,
            variance,
            time,
        });
    }
    Ok(variance.max(0.0))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(k−1)!!` for even `k`: the `k`-th central moment of a unit Gaussian.
pub(crate) fn gaussian_central_unit(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|j| j as f64).product()
}

/// Raw moment `E[Xᵏ]` of `N(m1, m2 − m1²)`.
pub fn gaussian_raw_moment(k: usize, m1: f64, m2: f64) -> Result<f64> {
    let variance = checked_variance(m1, m2, None)?;
    Ok((0..=k)
        .step_by(2)
        .map(|j| {
            binomial(k, j)
                * m1.powi((k - j) as i32)
                * variance.powi(j as i32 / 2)
                * gaussian_central_unit(j)
        })
        .sum())
}

/// `ṁₖ` of the moment hierarchy under Gaussian closure.
fn moment_derivative(model: &PolynomialDriftModel, state: MomentState, k: usize) -> Result<f64> {
    let mut drift = 0.0;
    for (i, a) in model.alpha.iter().enumerate() {
        drift += a * gaussian_raw_moment(i + k, state.m1, state.m2)?;
    }
    let diffusion = if k >= 2 {
        0.5 * (k * (k - 1)) as f64 * model.q_sq * gaussian_raw_moment(k - 2, state.m1, state.m2)?
    } else {
        0.0
    };
    Ok(-(k as f64) * drift + diffusion)
}

/// `(ṁ₁, ṁ₂)`.
pub fn moment_rhs(model: &PolynomialDriftModel, state: MomentState) -> Result<(f64, f64)> {
    Ok((
        moment_derivative(model, state, 1)?,
        moment_derivative(model, state, 2)?,
    ))
}

/// RK4 solution of the closed moment system from the model's initial moments.
pub fn integrate_moments(
    model: &PolynomialDriftModel,
    t_final: f64,
    dt: f64,
) -> Result<MomentState> {
    let s0 = model.initial_state();
    let y = ode::rk4(
        vec![s0.m1, s0.m2],
        t_final,
        dt,
        |t, y| {
            let (d1, d2) =
                moment_rhs(model, MomentState { m1: y[0], m2: y[1] }).map_err(|e| match e {
                    Error::InvalidVariance {
                        m1, m2, variance, ..
                    } => Error::InvalidVariance {
                        m1,
                        m2,
                        variance,
                        time: Some(t),
                    },
                    other => other,
                })?;
            Ok(vec![d1, d2])
        },
        |t, y| {
            let variance = checked_variance(y[0], y[1], Some(t))?;
            if y[1] - y[0] * y[0] < 0.0 {
                y[1] = y[0] * y[0] + variance;
            }
            Ok(())
        },
    )?;
    Ok(MomentState { m1: y[0], m2: y[1] })
}

/// Closed-form moments of the linear model `ẋ + a x = Γ`.
pub fn linear_exact(a: f64, q_sq: f64, m1_0: f64, m2_0: f64, t: f64) -> Result<MomentState> {
    if a == 0.0 {
        return Err(Error::ZeroDecay);
    }
    let stationary = q_sq / (2.0 * a);
    Ok(MomentState {
        m1: m1_0 * (-a * t).exp(),
        m2: (m2_0 - stationary) * (-2.0 * a * t).exp() + stationary,
    })
}

/// Moments of the linear model at `t`, including the pure-diffusion limit `a = 0`.
pub fn linear_solution(a: f64, q_sq: f64, m1_0: f64, m2_0: f64, t: f64) -> MomentState {
    match linear_exact(a, q_sq, m1_0, m2_0, t) {
        Ok(s) => s,
        Err(_) => MomentState {
            m1: m1_0,
            m2: m2_0 + q_sq * t,
        },
    }
}
