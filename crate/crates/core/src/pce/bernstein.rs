//! Range enclosure of tensor polynomials through their Bernstein coefficients.
//!
//! A polynomial in `ξ ∈ [−1, 1]^r` is brought to dense monomial form, mapped
//! to `u ∈ [0, 1]^r`, and converted to Bernstein coefficients with Garloff's
//! per-dimension transform `b_i = Σ_{j≤i} C(i,j)/C(N,j) a_j`. The range lies
//! between the smallest and largest coefficient.

use crate::error::{Error, Result};
use crate::interval_ds::Interval;
use crate::moment_dynamics::binomial;
use crate::pce::basis::{legendre_monomial, PceBasis};

/// Highest per-dimension degree accepted for a Bernstein conversion.
pub const BERNSTEIN_DEGREE_CAP: usize = 2 * crate::pce::basis::LEGENDRE_DEGREE_CAP;

/// Dense tensor-product polynomial `Σ a_J x^J`, `J ≤ degrees` componentwise.
/// Coefficients are stored row-major with the last dimension fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPoly {
    degrees: Vec<usize>,
    coeffs: Vec<f64>,
}

impl TensorPoly {
    pub fn zeros(degrees: Vec<usize>) -> Self {
        let n = degrees.iter().map(|d| d + 1).product();
        Self {
            degrees,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(degrees: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        let n: usize = degrees.iter().map(|d| d + 1).product();
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coeffs.len(),
            });
        }
        Ok(Self { degrees, coeffs })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dims(&self) -> usize {
        self.degrees.len()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.degrees.len()];
        for d in (0..self.degrees.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * (self.degrees[d + 1] + 1);
        }
        strides
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.degrees.len()];
        for d in (0..self.degrees.len()).rev() {
            let n = self.degrees[d] + 1;
            idx[d] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Monomial form of a Legendre expansion on `basis`.
    ///
    /// The per-dimension degree is the basis order, so lower-degree
    /// expansions are degree-elevated implicitly.
    pub fn from_legendre(coeffs: &[f64], basis: &PceBasis) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        let p = basis.order();
        let tables: Vec<Vec<f64>> = (0..=p).map(legendre_monomial).collect::<Result<_>>()?;
        let mut out = Self::zeros(vec![p; basis.dims()]);
        let strides = out.strides();
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let k = basis.multi_index(i);
            // expand Π_d P_{k_d}(x_d) term by term
            let mut terms = vec![(0usize, c)];
            for (d, &kd) in k.iter().enumerate() {
                let mut next = Vec::with_capacity(terms.len() * (kd + 1));
                for &(pos, v) in &terms {
                    for (e, &t) in tables[kd].iter().enumerate() {
                        if t != 0.0 {
                            next.push((pos + e * strides[d], v * t));
                        }
                    }
                }
                terms = next;
            }
            for (pos, v) in terms {
                out.coeffs[pos] += v;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(flat, c)| {
                let idx = self.multi_index(flat);
                c * idx
                    .iter()
                    .zip(x)
                    .map(|(&e, &xd)| xd.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn sub(&self, other: &TensorPoly) -> Result<TensorPoly> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: other.dims(),
            });
        }
        let degrees: Vec<usize> = self
            .degrees
            .iter()
            .zip(&other.degrees)
            .map(|(a, b)| *a.max(b))
            .collect();
        let mut out = TensorPoly::zeros(degrees);
        let strides = out.strides();
        for (src, sign) in [(self, 1.0), (other, -1.0)] {
            for (flat, &c) in src.coeffs.iter().enumerate() {
                let pos: usize = src
                    .multi_index(flat)
                    .iter()
                    .zip(&strides)
                    .map(|(i, s)| i * s)
                    .sum();
                out.coeffs[pos] += sign * c;
            }
        }
        Ok(out)
    }

    /// Exact product; degrees add per dimension.
    pub fn mul(&self, other: &TensorPoly) -> Result<TensorPoly> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: other.dims(),
            });
        }
        let degrees: Vec<usize> = self
            .degrees
            .iter()
            .zip(&other.degrees)
            .map(|(a, b)| a + b)
            .collect();
        let mut out = TensorPoly::zeros(degrees);
        let strides = out.strides();
        let other_idx: Vec<(usize, f64)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(f, c)| (f, *c))
            .collect();
        for (fa, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ia = self.multi_index(fa);
            for &(fb, cb) in &other_idx {
                let ib = other.multi_index(fb);
                let pos: usize = ia
                    .iter()
                    .zip(&ib)
                    .zip(&strides)
                    .map(|((a, b), s)| (a + b) * s)
                    .sum();
                out.coeffs[pos] += ca * cb;
            }
        }
        Ok(out)
    }

    /// Substitute `x_d ← shift + scale·x_d` in every dimension.
    pub fn compose_affine(&self, shift: &[f64], scale: &[f64]) -> TensorPoly {
        let mut out = self.clone();
        for d in 0..self.dims() {
            out = out.compose_affine_dim(d, shift[d], scale[d]);
        }
        out
    }

    fn compose_affine_dim(&self, d: usize, shift: f64, scale: f64) -> TensorPoly {
        let n = self.degrees[d];
        let strides = self.strides();
        let stride = strides[d];
        let mut out = TensorPoly::zeros(self.degrees.clone());
        // (s + c x)^k = Σ_j C(k,j) s^{k−j} c^j x^j
        for (flat, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let k = (flat / stride) % (n + 1);
            let base = flat - k * stride;
            for j in 0..=k {
                out.coeffs[base + j * stride] +=
                    a * binomial(k, j) * shift.powi((k - j) as i32) * scale.powi(j as i32);
            }
        }
        out
    }

    /// Bernstein coefficients on `[0, 1]^r` of the same degrees.
    pub fn bernstein_coefficients(&self) -> Result<BernsteinTensor> {
        if let Some(&degree) = self.degrees.iter().find(|&&d| d > BERNSTEIN_DEGREE_CAP) {
            return Err(Error::DegreeOverflow {
                degree,
                cap: BERNSTEIN_DEGREE_CAP,
            });
        }
        let strides = self.strides();
        let mut b = self.coeffs.clone();
        for (d, &n) in self.degrees.iter().enumerate() {
            let stride = strides[d];
            b = (0..b.len())
                .map(|flat| {
                    let i = (flat / stride) % (n + 1);
                    let base = flat - i * stride;
                    (0..=i)
                        .map(|j| binomial(i, j) / binomial(n, j) * b[base + j * stride])
                        .sum()
                })
                .collect();
        }
        Ok(BernsteinTensor {
            degrees: self.degrees.clone(),
            coeffs: b,
        })
    }
}

/// Bernstein coefficients of a tensor polynomial on the unit box.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinTensor {
    degrees: Vec<usize>,
    coeffs: Vec<f64>,
}

impl BernsteinTensor {
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `[min b, max b]`.
    pub fn range(&self) -> Interval {
        let (lo, hi) = self
            .coeffs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &b| {
                (lo.min(b), hi.max(b))
            });
        Interval::new(lo, hi).expect("finite Bernstein coefficients")
    }
}

/// Enclosure of a polynomial in `ξ ∈ [−1, 1]^r`, optionally refined by
/// splitting every dimension into `subdivisions` equal pieces.
pub fn enclose_on_reference_box(poly: &TensorPoly, subdivisions: usize) -> Result<Interval> {
    if poly.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(
            "polynomial has non-finite coefficients".into(),
        ));
    }
    let k = subdivisions.max(1);
    let r = poly.dims();
    // ξ = −1 + 2u maps [0,1] onto [−1,1]
    let unit = poly.compose_affine(&vec![-1.0; r], &vec![2.0; r]);
    if k == 1 {
        return Ok(unit.bernstein_coefficients()?.range());
    }
    let width = 1.0 / k as f64;
    let mut cell = vec![0usize; r];
    let mut hull: Option<Interval> = None;
    loop {
        let shift: Vec<f64> = cell.iter().map(|&c| c as f64 * width).collect();
        let piece = unit.compose_affine(&shift, &vec![width; r]);
        let range = piece.bernstein_coefficients()?.range();
        hull = Some(hull.map_or(range, |h| h.hull(&range)));
        let mut d = 0;
        loop {
            if d == r {
                return Ok(hull.expect("at least one cell"));
            }
            cell[d] += 1;
            if cell[d] < k {
                break;
            }
            cell[d] = 0;
            d += 1;
        }
    }
}

/// Range enclosure of a Legendre expansion over `[−1, 1]^r`.
pub fn bernstein_enclose(coeffs: &[f64], basis: &PceBasis) -> Result<Interval> {
    enclose_on_reference_box(&TensorPoly::from_legendre(coeffs, basis)?, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let b = PceBasis::new(1, 1).unwrap();
        assert_eq!(
            bernstein_enclose(&[2.5, 0.0], &b).unwrap(),
            Interval::new(2.5, 2.5).unwrap()
        );
        let r = bernstein_enclose(&[0.0, 1.0], &b).unwrap();
        assert!((r.lo() + 1.0).abs() < 1e-15 && (r.hi() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_on_cubic_basis() {
        // ξ² = 1/3 + (2/3) P₂. At degree 3 on [0,1]: ξ² = 1 − 4u + 4u², whose
        // Garloff coefficients are {1, 1 − 4/3, 1 − 8/3 + 4/3, 1} = {1, −1/3, −1/3, 1}.
        let basis = PceBasis::new(1, 3).unwrap();
        let coeffs = [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0];
        let poly = TensorPoly::from_legendre(&coeffs, &basis).unwrap();
        let unit = poly.compose_affine(&[-1.0], &[2.0]);
        let bern = unit.bernstein_coefficients().unwrap();
        let expected = [1.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
        for (b, e) in bern.coeffs().iter().zip(expected) {
            assert!((b - e).abs() < 1e-14);
        }
        let r = bernstein_enclose(&coeffs, &basis).unwrap();
        assert!(r.lo() <= 0.0 && r.lo() >= -0.5 && (r.hi() - 1.0).abs() < 1e-14);
        for i in 0..=10_000 {
            let x = -1.0 + 2.0 * i as f64 / 10_000.0;
            assert!(r.contains(x * x));
        }
        // at native degree two the lower coefficient is −1
        let quadratic = PceBasis::new(1, 2).unwrap();
        let r2 = bernstein_enclose(&coeffs[..3], &quadratic).unwrap();
        assert!((r2.lo() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn subdivision_tightens() {
        let basis = PceBasis::new(1, 3).unwrap();
        let coeffs = [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0];
        let poly = TensorPoly::from_legendre(&coeffs, &basis).unwrap();
        let coarse = enclose_on_reference_box(&poly, 1).unwrap();
        let fine = enclose_on_reference_box(&poly, 8).unwrap();
        assert!(fine.lo() > coarse.lo() && fine.lo() <= 0.0);
        assert!(coarse.contains_interval(&fine));
    }

    #[test]
    fn monomial_algebra() {
        let p = TensorPoly::from_coeffs(vec![1, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = TensorPoly::from_coeffs(vec![2, 0], vec![0.5, -1.0, 2.0]).unwrap();
        let prod = p.mul(&q).unwrap();
        let diff = p.sub(&q).unwrap();
        for x in [[0.3, -0.2], [1.0, 1.0], [-0.7, 0.9]] {
            assert!((prod.eval(&x) - p.eval(&x) * q.eval(&x)).abs() < 1e-13);
            assert!((diff.eval(&x) - (p.eval(&x) - q.eval(&x))).abs() < 1e-13);
            let shifted = p.compose_affine(&[0.5, -1.0], &[2.0, 0.25]);
            let y = [0.5 + 2.0 * x[0], -1.0 + 0.25 * x[1]];
            assert!((shifted.eval(&x) - p.eval(&y)).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_conversion_matches_basis_evaluation() {
        let basis = PceBasis::new(2, 3).unwrap();
        let coeffs: Vec<f64> = (0..basis.len())
            .map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3)
            .collect();
        let poly = TensorPoly::from_legendre(&coeffs, &basis).unwrap();
        for xi in [[0.2, 0.4], [-1.0, 1.0], [0.77, -0.31]] {
            assert!((poly.eval(&xi) - basis.eval(&coeffs, &xi)).abs() < 1e-13);
        }
    }

    #[test]
    fn degree_cap() {
        let poly = TensorPoly::zeros(vec![BERNSTEIN_DEGREE_CAP + 1]);
        assert!(matches!(
            poly.bernstein_coefficients(),
            Err(Error::DegreeOverflow { .. })
        ));
    }
}
