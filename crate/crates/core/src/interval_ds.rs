//! Closed intervals and finite Dempster-Shafer structures over them.
//!
//! A [`DsStructure`] is a list of focal elements with positive masses summing
//! to one. Focal elements may overlap or repeat; nothing is merged. On scalar
//! intervals the structure induces the cumulative belief / plausibility pair
//! (a p-box), the pignistic mixture of uniforms, and the NIDI ignorance score.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ mass = 1` accepted at construction.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A closed real interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Widen by `slack` on both sides.
    pub fn inflate(&self, slack: f64) -> Interval {
        Interval {
            lo: self.lo - slack,
            hi: self.hi + slack,
        }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// An axis-aligned box: one interval per epistemic coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyBox);
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// All `2^r` corners, first coordinate varying fastest.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let r = self.dims.len();
        (0..1usize << r)
            .map(|mask| {
                self.dims
                    .iter()
                    .enumerate()
                    .map(|(d, iv)| if mask >> d & 1 == 0 { iv.lo } else { iv.hi })
                    .collect()
            })
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims.len() && self.dims.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }
}

/// A finite body of evidence: focal elements with basic probability masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsStructure<F> {
    items: Vec<(F, f64)>,
}

impl<F> DsStructure<F> {
    /// Rejects empty input, non-positive masses, and mass sums off by more
    /// than [`MASS_TOLERANCE`]. Masses are stored as given.
    pub fn new(items: Vec<(F, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyStructure);
        }
        for (index, (_, mass)) in items.iter().enumerate() {
            if !(mass.is_finite() && *mass > 0.0) {
                return Err(Error::InvalidMass { index, mass: *mass });
            }
        }
        let sum: f64 = items.iter().map(|(_, m)| m).sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassSum {
                sum,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self { items })
    }

    /// Structure with a single focal element of mass one.
    pub fn certain(focal: F) -> Self {
        Self {
            items: vec![(focal, 1.0)],
        }
    }

    pub fn items(&self) -> &[(F, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn focals(&self) -> impl Iterator<Item = &F> {
        self.items.iter().map(|(f, _)| f)
    }

    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|(_, m)| *m)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().sum()
    }

    /// Mass-preserving map of the focal elements.
    pub fn map<G>(&self, mut f: impl FnMut(&F) -> G) -> DsStructure<G> {
        DsStructure {
            items: self.items.iter().map(|(x, m)| (f(x), *m)).collect(),
        }
    }

    pub fn try_map<G>(&self, mut f: impl FnMut(usize, &F) -> Result<G>) -> Result<DsStructure<G>> {
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, (x, m))| Ok((f(i, x)?, *m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DsStructure { items })
    }
}

impl DsStructure<Interval> {
    /// Smallest interval containing every focal element.
    pub fn support(&self) -> Interval {
        self.focals()
            .skip(1)
            .fold(self.items[0].0, |acc, iv| acc.hull(iv))
    }
}

/// Cumulative belief: total mass of focal elements lying entirely at or below `x`.
pub fn cbf(ds: &DsStructure<Interval>, x: f64) -> f64 {
    ds.items()
        .iter()
        .filter(|(iv, _)| iv.hi <= x)
        .map(|(_, m)| m)
        .sum()
}

/// Cumulative plausibility: total mass of focal elements starting at or below `x`.
pub fn cpf(ds: &DsStructure<Interval>, x: f64) -> f64 {
    ds.items()
        .iter()
        .filter(|(iv, _)| iv.lo <= x)
        .map(|(_, m)| m)
        .sum()
}

/// Pignistic density at `x`: each focal element spreads its mass uniformly.
///
/// Zero-width focal elements are atoms and carry no density; asking for the
/// density exactly on one is an error.
pub fn pignistic_pdf_eval(ds: &DsStructure<Interval>, x: f64) -> Result<f64> {
    let mut density = 0.0;
    for (iv, m) in ds.items() {
        if iv.is_point() {
            if iv.lo == x {
                return Err(Error::DegenerateFocal { x });
            }
        } else if iv.contains(x) {
            density += m / iv.width();
        }
    }
    Ok(density)
}

/// Mean of the pignistic distribution, `½ Σ mᵢ (loᵢ + hiᵢ)`.
pub fn pignistic_expectation(ds: &DsStructure<Interval>) -> f64 {
    0.5 * ds
        .items()
        .iter()
        .map(|(iv, m)| m * (iv.lo + iv.hi))
        .sum::<f64>()
}

/// `∫ (CPF − CBF)` over `domain`, summed exactly over the step breakpoints.
fn ignorance_over(ds: &DsStructure<Interval>, domain: Interval) -> f64 {
    let mut breaks: Vec<f64> = ds
        .focals()
        .flat_map(|iv| [iv.lo, iv.hi])
        .chain([domain.lo, domain.hi])
        .filter(|x| domain.contains(*x))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| {
            // CPF − CBF is constant on the open segment; probe its midpoint.
            let mid = 0.5 * (w[0] + w[1]);
            (cpf(ds, mid) - cbf(ds, mid)) * (w[1] - w[0])
        })
        .sum()
}

/// Unnormalized ignorance `∫ (CPF − CBF) dx` over the whole support.
pub fn ignorance_integral(ds: &DsStructure<Interval>) -> f64 {
    ignorance_over(ds, ds.support())
}

/// Normalized integral of the degree of ignorance over the structure's own
/// support `[min loᵢ, max hiᵢ]`.
pub fn nidi(ds: &DsStructure<Interval>) -> Result<f64> {
    let support = ds.support();
    if support.width() <= 0.0 {
        return Err(Error::DegenerateSupport { at: support.lo });
    }
    Ok(ignorance_over(ds, support) / support.width())
}

/// NIDI normalized by a fixed `domain` instead of the focal support, e.g.
/// `[0, 1]` for a structure over probabilities. Focal elements must lie in
/// the domain.
pub fn nidi_on_domain(ds: &DsStructure<Interval>, domain: Interval) -> Result<f64> {
    if domain.width() <= 0.0 {
        return Err(Error::DegenerateSupport { at: domain.lo });
    }
    let support = ds.support();
    if !domain.contains_interval(&support) {
        return Err(Error::InvalidArgument(format!(
            "focal support {support} is not inside the domain {domain}"
        )));
    }
    Ok(ignorance_over(ds, domain) / domain.width())
}

/// Independence (Cartesian-product) convolution of interval structures.
///
/// Output focal elements are boxes with one coordinate per factor; masses are
/// products. The first factor varies fastest.
pub fn convolve_independent(factors: &[DsStructure<Interval>]) -> Result<DsStructure<IntervalBox>> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument(
            "convolution needs at least one factor".into(),
        ));
    }
    let total: usize = factors.iter().map(DsStructure::len).product();
    let mut items = Vec::with_capacity(total);
    let mut index = vec![0usize; factors.len()];
    for _ in 0..total {
        let mut dims = Vec::with_capacity(factors.len());
        let mut mass = 1.0;
        for (factor, &k) in factors.iter().zip(&index) {
            let (iv, m) = factor.items()[k];
            dims.push(iv);
            mass *= m;
        }
        items.push((IntervalBox { dims }, mass));
        for (k, factor) in index.iter_mut().zip(factors) {
            *k += 1;
            if *k < factor.len() {
                break;
            }
            *k = 0;
        }
    }
    Ok(DsStructure { items })
}
