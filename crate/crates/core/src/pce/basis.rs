//! Total-degree multivariate Legendre basis on `[−1, 1]^r`.
//!
//! Inner products are taken against the normalized uniform measure, so
//! `⟨ψ₀²⟩ = 1` and coefficient 0 of an expansion is its mean.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Largest basis size accepted by [`PceBasis::new`].
pub const DEFAULT_BASIS_CAP: usize = 3003;

/// Highest univariate Legendre degree with exact monomial coefficients.
pub const LEGENDRE_DEGREE_CAP: usize = 12;

/// `P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    match n {
        0 => 1.0,
        _ => {
            for k in 1..n {
                let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Monomial coefficients of `P_n`, lowest power first.
///
/// Uses `P_n(x) = 2⁻ⁿ Σ_k (−1)^k C(n,k) C(2n−2k, n) x^{n−2k}`; every term is
/// an integer over a power of two, so the result is exact in `f64`.
pub fn legendre_monomial(n: usize) -> Result<Vec<f64>> {
    if n > LEGENDRE_DEGREE_CAP {
        return Err(Error::DegreeOverflow {
            degree: n,
            cap: LEGENDRE_DEGREE_CAP,
        });
    }
    fn choose(n: u64, k: u64) -> i64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as i64
    }
    let mut coeffs = vec![0.0; n + 1];
    let scale = (1u64 << n) as f64;
    for k in 0..=n / 2 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let num = sign * choose(n as u64, k as u64) * choose((2 * n - 2 * k) as u64, n as u64);
        coeffs[n - 2 * k] = num as f64 / scale;
    }
    Ok(coeffs)
}

fn legendre_derivative(n: usize, x: f64) -> f64 {
    n as f64 * (x * legendre(n, x) - legendre(n - 1, x)) / (x * x - 1.0)
}

/// Gauss-Legendre nodes and weights on `[−1, 1]` (weights sum to 2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let dx = legendre(n, x) / legendre_derivative(n, x);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// One non-zero Galerkin product coefficient: `(u·v)_c += u_a v_b · value`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProductEntry {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    /// `⟨ψ_a ψ_b ψ_c⟩ / ⟨ψ_c²⟩`
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct PceBasis {
    dims: usize,
    order: usize,
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    norms: Vec<f64>,
    products: Vec<ProductEntry>,
}

/// `C(r + p, p)`, saturating.
pub fn basis_size(r: usize, p: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..p.min(r) {
        acc = acc * (r + p - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

impl PceBasis {
    pub fn new(r: usize, p: usize) -> Result<Self> {
        Self::with_cap(r, p, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(r: usize, p: usize, cap: usize) -> Result<Self> {
        if r == 0 || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "basis needs r >= 1 and p >= 1, got r = {r}, p = {p}"
            )));
        }
        if p > LEGENDRE_DEGREE_CAP {
            return Err(Error::DegreeOverflow {
                degree: p,
                cap: LEGENDRE_DEGREE_CAP,
            });
        }
        let size = basis_size(r, p);
        if size > cap {
            return Err(Error::BasisTooLarge { size, cap });
        }

        let indices = total_degree_indices(r, p);
        debug_assert_eq!(indices.len(), size);
        let lookup: HashMap<Vec<usize>, usize> = indices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();

        let triple = univariate_triples(p);
        let norm1: Vec<f64> = (0..=p).map(|k| 1.0 / (2 * k + 1) as f64).collect();
        let norms: Vec<f64> = indices
            .iter()
            .map(|idx| idx.iter().map(|&k| norm1[k]).product())
            .collect();

        let mut products = Vec::new();
        let mut target = vec![0; r];
        for (a, ia) in indices.iter().enumerate() {
            for (b, ib) in indices.iter().enumerate() {
                enumerate_products(ia, ib, p, 0, 0, &mut target, &mut |ic| {
                    let c = lookup[ic];
                    let value: f64 = (0..r).map(|d| triple[ia[d]][ib[d]][ic[d]]).product();
                    if value != 0.0 {
                        products.push(ProductEntry {
                            a: a as u32,
                            b: b as u32,
                            c: c as u32,
                            value: value / norms[c],
                        });
                    }
                });
            }
        }

        Ok(Self {
            dims: r,
            order: p,
            indices,
            lookup,
            norms,
            products,
        })
    }

    /// Number of stochastic dimensions.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn position(&self, multi_index: &[usize]) -> Option<usize> {
        self.lookup.get(multi_index).copied()
    }

    /// Index of the first-order polynomial `ξ_d`.
    pub fn linear_index(&self, d: usize) -> usize {
        let mut k = vec![0; self.dims];
        k[d] = 1;
        self.lookup[&k]
    }

    /// `⟨ψ_i²⟩`.
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// `⟨ψ_a ψ_b ψ_c⟩` (normalized measure).
    pub fn triple_product(&self, a: usize, b: usize, c: usize) -> f64 {
        self.products
            .iter()
            .find(|e| e.a as usize == a && e.b as usize == b && e.c as usize == c)
            .map_or(0.0, |e| e.value * self.norms[c])
    }

    /// `ψ_i(ξ)`.
    pub fn eval_basis(&self, i: usize, xi: &[f64]) -> f64 {
        self.indices[i]
            .iter()
            .zip(xi)
            .map(|(&k, &x)| legendre(k, x))
            .product()
    }

    /// `Σ cᵢ ψᵢ(ξ)`.
    pub fn eval(&self, coeffs: &[f64], xi: &[f64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| c * self.eval_basis(i, xi))
            .sum()
    }

    /// Galerkin product: the projection of `u·v` back onto the basis.
    pub fn multiply(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for e in &self.products {
            out[e.c as usize] += u[e.a as usize] * v[e.b as usize] * e.value;
        }
        out
    }

    pub fn constant(&self, c: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        out[0] = c;
        out
    }
}

/// Visit every multi-index `k` of total degree ≤ `p` with
/// `|i_d − j_d| ≤ k_d ≤ i_d + j_d` and `i_d + j_d + k_d` even in each
/// dimension; all other triple products vanish.
fn enumerate_products(
    i: &[usize],
    j: &[usize],
    p: usize,
    d: usize,
    used: usize,
    target: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if d == i.len() {
        visit(target);
        return;
    }
    let lo = i[d].abs_diff(j[d]);
    let hi = (i[d] + j[d]).min(p - used);
    let mut k = lo;
    while k <= hi {
        target[d] = k;
        enumerate_products(i, j, p, d + 1, used + k, target, visit);
        k += 2;
    }
    target[d] = 0;
}

/// Multi-indices of total degree ≤ p, graded by degree.
fn total_degree_indices(r: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if d == cur.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (0..=remaining).rev() {
            cur[d] = k;
            rec(d + 1, remaining - k, cur, out);
        }
        cur[d] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; r];
    for degree in 0..=p {
        rec(0, degree, &mut cur, &mut out);
    }
    out
}

/// `½ ∫ P_i P_j P_k` for `i, j, k ≤ p`, by Gauss-Legendre with enough nodes
/// to integrate degree `3p` exactly.
fn univariate_triples(p: usize) -> Vec<Vec<Vec<f64>>> {
    let n = 3 * p / 2 + 1;
    let (nodes, weights) = gauss_legendre(n);
    let values: Vec<Vec<f64>> = (0..=p)
        .map(|k| nodes.iter().map(|&x| legendre(k, x)).collect())
        .collect();
    let mut t = vec![vec![vec![0.0; p + 1]; p + 1]; p + 1];
    for i in 0..=p {
        for j in 0..=p {
            for k in 0..=p {
                // parity and triangle conditions give exact zeros
                if (i + j + k) % 2 == 1 || k > i + j || i > j + k || j > i + k {
                    continue;
                }
                t[i][j][k] = 0.5
                    * (0..n)
                        .map(|q| weights[q] * values[i][q] * values[j][q] * values[k][q])
                        .sum::<f64>();
            }
        }
    }
    t
}
