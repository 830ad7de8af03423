//! Galerkin-projected moment equations on a Legendre chaos basis.
//!
//! Every model input and both moments become expansions in `ξ ∈ [−1, 1]^r`.
//! Products are projected back onto the basis through the precomputed triple
//! products, so the closed moment system turns into `2P` deterministic ODEs.

use crate::error::{Error, Result};
use crate::interval_ds::Interval;
use crate::model::{InitialCondition, ModelTemplate, Param, Slot};
use crate::moment_dynamics::{binomial, gaussian_central_unit};
use crate::ode;
use crate::pce::basis::PceBasis;

/// Chaos coefficients of the two raw moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PceState {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
}

/// Model inputs expanded on the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedModel {
    pub alpha: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    /// Galerkin square of `q`.
    pub q_sq: Vec<f64>,
}

fn is_constant(u: &[f64]) -> bool {
    u[1..].iter().all(|c| *c == 0.0)
}

/// Galerkin product with a shortcut for constant factors.
fn product(basis: &PceBasis, u: &[f64], v: &[f64]) -> Vec<f64> {
    if is_constant(u) {
        v.iter().map(|x| u[0] * x).collect()
    } else if is_constant(v) {
        u.iter().map(|x| v[0] * x).collect()
    } else {
        basis.multiply(u, v)
    }
}

fn axpy(acc: &mut [f64], scale: f64, x: &[f64]) {
    for (a, x) in acc.iter_mut().zip(x) {
        *a += scale * x;
    }
}

/// Expansions of every template input for one epistemic box. Coordinate `d`
/// of `dims` becomes `mid + half·ξ_d`; scalar inputs are constants.
pub fn init_pce(
    dims: &[Interval],
    basis: &PceBasis,
    template: &ModelTemplate,
) -> Result<(PceState, ExpandedModel)> {
    let epistemic: Vec<Slot> = template.epistemic().into_iter().map(|(s, _)| s).collect();
    if dims.len() != epistemic.len() {
        return Err(Error::DimensionMismatch {
            expected: epistemic.len(),
            got: dims.len(),
        });
    }
    if basis.dims() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.dims(),
            got: dims.len(),
        });
    }
    let expand = |slot: Slot| -> Vec<f64> {
        match template.param(slot) {
            Some(Param::Scalar(x)) => basis.constant(*x),
            _ => {
                let d = epistemic
                    .iter()
                    .position(|s| *s == slot)
                    .expect("epistemic slot");
                let mut c = basis.constant(dims[d].mid());
                c[basis.linear_index(d)] = dims[d].half_width();
                c
            }
        }
    };

    let alpha: Vec<Vec<f64>> = (0..template.alpha.len())
        .map(|i| expand(Slot::Alpha(i)))
        .collect();
    let q = expand(Slot::Q);
    let q_sq = product(basis, &q, &q);
    let state = match template.initial {
        InitialCondition::MeanVariance { .. } => {
            let mean = expand(Slot::Mean);
            let mut m2 = expand(Slot::Variance);
            axpy(&mut m2, 1.0, &product(basis, &mean, &mean));
            PceState { m1: mean, m2 }
        }
        InitialCondition::RawMoments { .. } => PceState {
            m1: expand(Slot::M1),
            m2: expand(Slot::M2),
        },
    };
    Ok((state, ExpandedModel { alpha, q, q_sq }))
}

/// Expansions of the Gaussian raw moments `m_0 … m_max` implied by the
/// expanded `m1`, `m2`.
fn raw_moments(basis: &PceBasis, state: &PceState, max: usize) -> Vec<Vec<f64>> {
    let mut out = vec![basis.constant(1.0), state.m1.clone()];
    if max < 2 {
        out.truncate(max + 1);
        return out;
    }
    out.push(state.m2.clone());
    if max == 2 {
        return out;
    }
    let mut variance = state.m2.clone();
    axpy(&mut variance, -1.0, &product(basis, &state.m1, &state.m1));

    let mut mean_pow = vec![basis.constant(1.0), state.m1.clone()];
    for k in 2..=max {
        let next = product(basis, &mean_pow[k - 1], &state.m1);
        mean_pow.push(next);
    }
    let mut var_pow = vec![basis.constant(1.0), variance.clone()];
    for k in 2..=max / 2 {
        let next = product(basis, &var_pow[k - 1], &variance);
        var_pow.push(next);
    }
    for k in 3..=max {
        let mut mk = vec![0.0; basis.len()];
        for j in (0..=k).step_by(2) {
            let term = product(basis, &mean_pow[k - j], &var_pow[j / 2]);
            axpy(&mut mk, binomial(k, j) * gaussian_central_unit(j), &term);
        }
        out.push(mk);
    }
    out
}

/// Time derivative of the chaos coefficients.
pub fn galerkin_rhs(state: &PceState, basis: &PceBasis, model: &ExpandedModel) -> PceState {
    let n = model.alpha.len();
    let m = raw_moments(basis, state, n + 1);
    let mut d1 = vec![0.0; basis.len()];
    let mut d2 = model.q_sq.clone();
    for (i, a) in model.alpha.iter().enumerate() {
        // alpha[i] multiplies x^(i+1)
        axpy(&mut d1, -1.0, &product(basis, a, &m[i + 1]));
        axpy(&mut d2, -2.0, &product(basis, a, &m[i + 2]));
    }
    PceState { m1: d1, m2: d2 }
}

/// RK4 integration of the coefficient system.
pub fn integrate_pce(
    state0: &PceState,
    basis: &PceBasis,
    model: &ExpandedModel,
    t_final: f64,
    dt: f64,
) -> Result<PceState> {
    let p = basis.len();
    let mut y0 = state0.m1.clone();
    y0.extend_from_slice(&state0.m2);
    let y = ode::rk4(
        y0,
        t_final,
        dt,
        |_, y| {
            let s = PceState {
                m1: y[..p].to_vec(),
                m2: y[p..].to_vec(),
            };
            let d = galerkin_rhs(&s, basis, model);
            let mut out = d.m1;
            out.extend(d.m2);
            Ok(out)
        },
        |t, y| {
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "chaos coefficients diverged at t = {t}"
                )));
            }
            Ok(())
        },
    )?;
    Ok(PceState {
        m1: y[..p].to_vec(),
        m2: y[p..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_ds::DsStructure;
    use crate::moment_dynamics::{integrate_moments, linear_exact, moment_rhs, MomentState};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn linear_template(a: Param, q: Param) -> ModelTemplate {
        ModelTemplate::new(
            vec![a],
            q,
            InitialCondition::RawMoments {
                m1: 1.1.into(),
                m2: 2.42.into(),
            },
        )
        .unwrap()
    }

    fn evidence(lo: f64, hi: f64) -> Param {
        Param::Evidence(DsStructure::certain(iv(lo, hi)))
    }

    #[test]
    fn init_affine_expansions() {
        let t = linear_template(evidence(0.86, 0.9), 0.3.into());
        let basis = PceBasis::new(1, 3).unwrap();
        let (state, model) = init_pce(&[iv(0.86, 0.9)], &basis, &t).unwrap();
        assert!((model.alpha[0][0] - 0.88).abs() < 1e-15);
        assert!((model.alpha[0][1] - 0.02).abs() < 1e-15);
        assert!(model.alpha[0][2..].iter().all(|c| *c == 0.0));
        assert_eq!(state.m1, vec![1.1, 0.0, 0.0, 0.0]);
        assert!((model.q_sq[0] - 0.09).abs() < 1e-15);

        // a point interval is a constant expansion
        let (_, model) = init_pce(
            &[iv(0.7, 0.7)],
            &basis,
            &linear_template(evidence(0.7, 0.7), 0.3.into()),
        )
        .unwrap();
        assert_eq!(model.alpha[0], vec![0.7, 0.0, 0.0, 0.0]);

        assert!(matches!(
            init_pce(&[iv(0.0, 1.0), iv(0.0, 1.0)], &basis, &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_inputs_follow_the_scalar_system() {
        let model_t = ModelTemplate::new(
            vec![0.4.into(), evidence(0.2, 0.2), 0.1.into()],
            0.5.into(),
            InitialCondition::RawMoments {
                m1: 0.3.into(),
                m2: 0.5.into(),
            },
        )
        .unwrap();
        let basis = PceBasis::new(1, 3).unwrap();
        let (state, model) = init_pce(&[iv(0.2, 0.2)], &basis, &model_t).unwrap();
        let d = galerkin_rhs(&state, &basis, &model);
        let scalar = model_t.instantiate(&[0.2]).unwrap();
        let (d1, d2) = moment_rhs(&scalar, MomentState { m1: 0.3, m2: 0.5 }).unwrap();
        assert!((d.m1[0] - d1).abs() < 1e-14);
        assert!((d.m2[0] - d2).abs() < 1e-14);
        assert!(d.m1[1..].iter().chain(&d.m2[1..]).all(|c| c.abs() < 1e-15));

        let end = integrate_pce(&state, &basis, &model, 1.0, 0.01).unwrap();
        let reference = integrate_moments(&scalar, 1.0, 0.01).unwrap();
        assert!((end.m1[0] - reference.m1).abs() < 1e-12);
        assert!((end.m2[0] - reference.m2).abs() < 1e-12);
    }

    /// Pointwise check of the projected linear right-hand side: with `a` of
    /// degree one and `m1, m2` of degree below `p`, projection is exact.
    #[test]
    fn linear_rhs_matches_sampling() {
        let t = linear_template(evidence(0.86, 0.9), evidence(0.2, 0.3));
        let basis = PceBasis::new(2, 3).unwrap();
        let (_, model) = init_pce(&[iv(0.86, 0.9), iv(0.2, 0.3)], &basis, &t).unwrap();
        let mut state = PceState {
            m1: basis.constant(0.0),
            m2: basis.constant(0.0),
        };
        for (i, k) in basis.indices().iter().enumerate() {
            let degree: usize = k.iter().sum();
            if degree < 3 {
                state.m1[i] = 0.3 / (1 + i) as f64;
                state.m2[i] = 0.9 - 0.05 * i as f64;
            }
        }
        let d = galerkin_rhs(&state, &basis, &model);
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..100 {
            let xi = [next(), next()];
            let a = 0.88 + 0.02 * xi[0];
            let q = 0.25 + 0.05 * xi[1];
            let m1 = basis.eval(&state.m1, &xi);
            let m2 = basis.eval(&state.m2, &xi);
            assert!((basis.eval(&d.m1, &xi) - (-a * m1)).abs() < 1e-10);
            assert!((basis.eval(&d.m2, &xi) - (-2.0 * a * m2 + q * q)).abs() < 1e-10);
        }
    }

    #[test]
    fn noise_only_enters_the_second_moment() {
        let t = linear_template(0.9.into(), evidence(0.3, 0.4));
        let basis = PceBasis::new(1, 3).unwrap();
        let (state, model) = init_pce(&[iv(0.3, 0.4)], &basis, &t).unwrap();
        let d = galerkin_rhs(&state, &basis, &model);
        assert!(d.m1[1..].iter().all(|c| *c == 0.0));
        // q² = (0.35 + 0.05ξ)² = 0.1225 + 0.035ξ + 0.0025ξ²
        for xi in [-1.0, -0.2, 0.6, 1.0] {
            let expected = -2.0 * 0.9 * 2.42 + (0.35 + 0.05 * xi) * (0.35 + 0.05 * xi);
            assert!((basis.eval(&d.m2, &[xi]) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let t = linear_template(evidence(0.86, 0.9), evidence(0.2, 0.3));
        let basis = PceBasis::new(2, 3).unwrap();
        let (state, model) = init_pce(&[iv(0.86, 0.9), iv(0.2, 0.3)], &basis, &t).unwrap();
        assert_eq!(
            integrate_pce(&state, &basis, &model, 0.0, 0.01).unwrap(),
            state
        );
    }

    #[test]
    fn scalar_linear_case_matches_closed_form() {
        let t = linear_template(evidence(0.9, 0.9), 0.3.into());
        let basis = PceBasis::new(1, 3).unwrap();
        let (state, model) = init_pce(&[iv(0.9, 0.9)], &basis, &t).unwrap();
        let end = integrate_pce(&state, &basis, &model, 2.0, 1e-3).unwrap();
        let exact = linear_exact(0.9, 0.09, 1.1, 2.42, 2.0).unwrap();
        assert!((end.m1[0] - exact.m1).abs() < 1e-8);
        assert!((end.m2[0] - exact.m2).abs() < 1e-8);
    }

    #[test]
    fn cubic_raw_moments_match_closure_at_points() {
        // With constant inputs every Galerkin product is exact, so the
        // recomposed m3, m4 equal the Gaussian closure values.
        let basis = PceBasis::new(1, 2).unwrap();
        let state = PceState {
            m1: basis.constant(0.4),
            m2: basis.constant(1.3),
        };
        let m = raw_moments(&basis, &state, 4);
        let m3 = crate::moment_dynamics::gaussian_raw_moment(3, 0.4, 1.3).unwrap();
        let m4 = crate::moment_dynamics::gaussian_raw_moment(4, 0.4, 1.3).unwrap();
        assert!((m[3][0] - m3).abs() < 1e-14);
        assert!((m[4][0] - m4).abs() < 1e-14);
    }
}
