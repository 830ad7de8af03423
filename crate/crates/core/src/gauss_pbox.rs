//! Gaussian p-boxes induced by mean/variance boxes, and the pignistic and
//! ignorance summaries of a DS structure over them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_ds::{ignorance_integral, nidi, pignistic_expectation, DsStructure, Interval};
use crate::pce::GaussianBox;

/// Grid size used when no grid is supplied.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Half-width of the default grid beyond the mean range, in units of the
/// largest standard deviation.
pub const DEFAULT_GRID_SIGMAS: f64 = 6.0;

pub const DEFAULT_PERCENTILE: f64 = 0.05;

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// CDF of `N(mu, variance)` at `x`; a zero variance is the right-continuous
/// step at `mu`.
pub fn normal_cdf(x: f64, mu: f64, variance: f64) -> f64 {
    if variance == 0.0 {
        if x >= mu {
            1.0
        } else {
            0.0
        }
    } else {
        std_normal_cdf((x - mu) / variance.sqrt())
    }
}

/// Pointwise bounds on `N(x; μ, σ²)` over the box.
///
/// The CDF decreases in `μ`, so the lower bound uses the largest mean and the
/// upper bound the smallest. In `σ²` the CDF falls left of the mean and rises
/// right of it, which picks the variance end.
pub fn envelope_eval(b: &GaussianBox, x: f64) -> (f64, f64) {
    let (mu_lo, mu_hi) = (b.mu.lo(), b.mu.hi());
    let (v_lo, v_hi) = (b.sigma_sq.lo(), b.sigma_sq.hi());
    let lower = normal_cdf(x, mu_hi, if x < mu_hi { v_lo } else { v_hi });
    let upper = normal_cdf(x, mu_lo, if x < mu_lo { v_hi } else { v_lo });
    (lower, upper)
}

/// Envelope of every Gaussian CDF with parameters in a [`GaussianBox`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussPBox {
    #[serde(flatten)]
    pub gbox: GaussianBox,
}

impl GaussPBox {
    pub fn new(gbox: GaussianBox) -> Self {
        Self { gbox }
    }

    pub fn lower(&self, x: f64) -> f64 {
        envelope_eval(&self.gbox, x).0
    }

    pub fn upper(&self, x: f64) -> f64 {
        envelope_eval(&self.gbox, x).1
    }

    pub fn bounds(&self, x: f64) -> (f64, f64) {
        envelope_eval(&self.gbox, x)
    }
}

pub type PBoxSet = DsStructure<GaussPBox>;

/// Lift each mean/variance box to its p-box, keeping masses.
pub fn induce_pbox_set(moments: &DsStructure<GaussianBox>) -> PBoxSet {
    moments.map(|b| GaussPBox::new(*b))
}

/// DS structure on probabilities `P(Y ≤ x_f)`: one interval
/// `[lowerN_i(x_f), upperN_i(x_f)]` per p-box.
pub fn slice_at(pbs: &PBoxSet, x_f: f64) -> DsStructure<Interval> {
    pbs.map(|p| {
        let (l, u) = p.bounds(x_f);
        Interval::new(l.min(u), u.max(l)).expect("cdf values are finite")
    })
}

/// `P_Bet(x) = ½ Σ p_i (lowerN_i(x) + upperN_i(x))`.
pub fn pignistic_cdf_at(pbs: &PBoxSet, x: f64) -> f64 {
    pignistic_expectation(&slice_at(pbs, x))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    if grid.iter().any(|x| x.is_nan()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Pignistic CDF on a strictly increasing grid.
pub fn pignistic_cdf(pbs: &PBoxSet, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    Ok(grid.par_iter().map(|&x| pignistic_cdf_at(pbs, x)).collect())
}

/// Ignorance function sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgnoranceCurve {
    pub grid: Vec<f64>,
    /// `∫ (CPF − CBF) dz` of the sliced structure, unnormalized.
    pub igf: Vec<f64>,
    /// The same integral divided by the sliced structure's own support
    /// width; 0 where the slice collapses to a point.
    pub nidi_at: Vec<f64>,
}

/// `IgF(x_f)` at one point.
pub fn ignorance_at(pbs: &PBoxSet, x_f: f64) -> f64 {
    ignorance_integral(&slice_at(pbs, x_f))
}

pub fn ignorance_function(pbs: &PBoxSet, grid: &[f64]) -> Result<IgnoranceCurve> {
    check_grid(grid)?;
    let (igf, nidi_at): (Vec<f64>, Vec<f64>) = grid
        .par_iter()
        .map(|&x| {
            let slice = slice_at(pbs, x);
            let n = match nidi(&slice) {
                Ok(v) => v,
                Err(Error::DegenerateSupport { .. }) => 0.0,
                Err(e) => unreachable!("slice of a valid p-box set: {e}"),
            };
            (ignorance_integral(&slice), n)
        })
        .unzip();
    Ok(IgnoranceCurve {
        grid: grid.to_vec(),
        igf,
        nidi_at,
    })
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            out[n - 1] = hi;
            out
        }
    }
}

/// Range `[μ_min − 6σ_max, μ_max + 6σ_max]` over all boxes.
pub fn default_range(pbs: &PBoxSet) -> (f64, f64) {
    let mut mu_lo = f64::INFINITY;
    let mut mu_hi = f64::NEG_INFINITY;
    let mut v_max: f64 = 0.0;
    for p in pbs.focals() {
        mu_lo = mu_lo.min(p.gbox.mu.lo());
        mu_hi = mu_hi.max(p.gbox.mu.hi());
        v_max = v_max.max(p.gbox.sigma_sq.hi());
    }
    let mut pad = DEFAULT_GRID_SIGMAS * v_max.sqrt();
    if mu_hi - mu_lo + pad == 0.0 {
        // every p-box is the same step function
        pad = 1.0;
    }
    (mu_lo - pad, mu_hi + pad)
}

pub fn default_grid(pbs: &PBoxSet) -> Vec<f64> {
    let (lo, hi) = default_range(pbs);
    linspace(lo, hi, DEFAULT_GRID_POINTS)
}

/// First `x` where the sampled nondecreasing `cdf` reaches `level`, by linear
/// interpolation between grid neighbours.
fn locate_level(grid: &[f64], cdf: &[f64], level: f64) -> f64 {
    let Some(i) = cdf.iter().position(|&c| c >= level) else {
        return grid[grid.len() - 1];
    };
    if i == 0 {
        return grid[0];
    }
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let (x0, x1) = (grid[i - 1], grid[i]);
    if c1 > c0 {
        x0 + (level - c0) / (c1 - c0) * (x1 - x0)
    } else {
        x1
    }
}

/// Normalized integral of the ignorance function plus the window it was
/// taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Niigf {
    pub value: f64,
    pub percentile: f64,
    pub x_min: f64,
    pub x_max: f64,
}

/// NIigF with percentile window located on `bracket_grid` and the trapezoid
/// taken over `points` equally spaced nodes inside the window.
pub fn niigf_detail(
    pbs: &PBoxSet,
    percentile: f64,
    bracket_grid: &[f64],
    points: usize,
) -> Result<Niigf> {
    if !(percentile > 0.0 && percentile < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "percentile must lie in (0, 0.5), got {percentile}"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument(
            "niigf needs at least two quadrature nodes".into(),
        ));
    }
    let cdf = pignistic_cdf(pbs, bracket_grid)?;
    let x_min = locate_level(bracket_grid, &cdf, percentile);
    let x_max = locate_level(bracket_grid, &cdf, 1.0 - percentile);
    if x_max <= x_min || x_max.is_nan() || x_min.is_nan() {
        return Err(Error::DegenerateRange { x_min, x_max });
    }
    let nodes = linspace(x_min, x_max, points);
    let igf: Vec<f64> = nodes.par_iter().map(|&x| ignorance_at(pbs, x)).collect();
    let h = (x_max - x_min) / (points - 1) as f64;
    let inner: f64 = igf[1..points - 1].iter().sum();
    let integral = h * (inner + 0.5 * (igf[0] + igf[points - 1]));
    Ok(Niigf {
        value: integral / (x_max - x_min),
        percentile,
        x_min,
        x_max,
    })
}

/// NIigF for percentile `percentile` (a fraction, e.g. 0.05 for the 5th and
/// 95th percentiles) on the default grid.
pub fn niigf(pbs: &PBoxSet, percentile: f64) -> Result<f64> {
    Ok(niigf_detail(pbs, percentile, &default_grid(pbs), DEFAULT_GRID_POINTS)?.value)
}
