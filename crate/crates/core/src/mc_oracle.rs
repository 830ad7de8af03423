//! Monte Carlo baseline: every epistemic input is replaced by its pignistic
//! distribution, sampled, and pushed through the moment dynamics.
//!
//! Randomness comes from ChaCha8 seeded with `seed`. For sample `i` and
//! epistemic slot `s`, the focal index is chosen from the `u64` at word
//! offset `2·(i·n_slots + s)` of stream 0; the uniform inside the focal uses
//! the `s`-th `u64` of stream `i + 1`. Each sample therefore owns fixed words
//! regardless of `n_samples` or thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss_pbox::normal_cdf;
use crate::interval_ds::{DsStructure, Interval};
use crate::model::ModelTemplate;
use crate::moment_dynamics::{integrate_moments, linear_exact, MomentState, DEFAULT_DT};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub x_f: f64,
    pub t_final: f64,
    /// Step for the numeric solver when no closed form applies.
    pub dt: f64,
}

impl McConfig {
    pub fn new(x_f: f64, t_final: f64) -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
            x_f,
            t_final,
            dt: DEFAULT_DT,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument(
                "Monte Carlo needs at least one sample".into(),
            ));
        }
        if self.x_f.is_nan() {
            return Err(Error::InvalidArgument("threshold is NaN".into()));
        }
        Ok(())
    }
}

/// Uniform on `[0, 1)` from the top 53 bits.
fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Focal index whose cumulative mass first exceeds `u`.
pub fn select_focal(ds: &DsStructure<Interval>, u: f64) -> usize {
    let mut acc = 0.0;
    for (i, m) in ds.masses().enumerate() {
        acc += m;
        if u < acc {
            return i;
        }
    }
    ds.len() - 1
}

/// `lo + u·(hi − lo)`; exact for zero-width focals.
pub fn uniform_in(focal: &Interval, u: f64) -> f64 {
    if focal.is_point() {
        focal.lo()
    } else {
        (focal.lo() + u * focal.width()).min(focal.hi())
    }
}

/// One draw from the pignistic mixture `Σ m_i U(focal_i)`.
pub fn sample_pignistic<R: RngCore>(ds: &DsStructure<Interval>, rng: &mut R) -> f64 {
    let i = select_focal(ds, unit_f64(rng.next_u64()));
    uniform_in(&ds.items()[i].0, unit_f64(rng.next_u64()))
}

/// Per-sample record kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct McSamples {
    pub n_slots: usize,
    /// Focal index per slot, row-major by sample.
    pub focal_index: Vec<usize>,
    /// Drawn parameter values, same layout.
    pub values: Vec<f64>,
    /// Moments at `t_final` per sample.
    pub moments: Vec<MomentState>,
    /// `P(Y ≤ x_f | drawn parameters)` per sample.
    pub cond_prob: Vec<f64>,
}

impl McSamples {
    pub fn len(&self) -> usize {
        self.cond_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cond_prob.is_empty()
    }

    pub fn focals_of(&self, i: usize) -> &[usize] {
        &self.focal_index[i * self.n_slots..(i + 1) * self.n_slots]
    }

    pub fn values_of(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_slots..(i + 1) * self.n_slots]
    }

    /// Conditional probabilities for another threshold, reusing the moments.
    pub fn conditional_probs(&self, x_f: f64) -> Vec<f64> {
        self.moments
            .par_iter()
            .map(|s| normal_cdf(x_f, s.mean(), s.variance()))
            .collect()
    }
}

/// Moments at `t_final` for one concrete draw.
fn moments_for(template: &ModelTemplate, values: &[f64], cfg: &McConfig) -> Result<MomentState> {
    let model = template.instantiate(values)?;
    let a = model.alpha()[0];
    if model.is_linear() && a != 0.0 {
        let s0 = model.initial_state();
        linear_exact(a, model.q_sq(), s0.m1, s0.m2, cfg.t_final)
    } else {
        integrate_moments(&model, cfg.t_final, cfg.dt)
    }
}

/// Draw `cfg.n_samples` parameter vectors and their conditional probabilities.
pub fn run_samples(template: &ModelTemplate, cfg: &McConfig) -> Result<McSamples> {
    cfg.validate()?;
    let evidence: Vec<&DsStructure<Interval>> =
        template.epistemic().into_iter().map(|(_, ds)| ds).collect();
    let n_slots = evidence.len();
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    type Draw = (Vec<usize>, Vec<f64>, MomentState);
    let draws: Vec<Result<Draw>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut top = base.clone();
            top.set_word_pos(2 * (i as u128) * (n_slots as u128));
            let mut sub = base.clone();
            sub.set_stream(i as u64 + 1);
            sub.set_word_pos(0);
            let mut focals = Vec::with_capacity(n_slots);
            let mut values = Vec::with_capacity(n_slots);
            for ds in &evidence {
                let k = select_focal(ds, unit_f64(top.next_u64()));
                focals.push(k);
                values.push(uniform_in(&ds.items()[k].0, unit_f64(sub.next_u64())));
            }
            let s = moments_for(template, &values, cfg)?;
            Ok((focals, values, s))
        })
        .collect();

    let mut out = McSamples {
        n_slots,
        focal_index: Vec::with_capacity(cfg.n_samples * n_slots),
        values: Vec::with_capacity(cfg.n_samples * n_slots),
        moments: Vec::with_capacity(cfg.n_samples),
        cond_prob: Vec::new(),
    };
    for (i, d) in draws.into_iter().enumerate() {
        let (f, v, s) = d.inspect_err(|e| log::error!("Monte Carlo sample {i} failed: {e}"))?;
        out.focal_index.extend(f);
        out.values.extend(v);
        out.moments.push(s);
    }
    out.cond_prob = out.conditional_probs(cfg.x_f);
    Ok(out)
}

/// Sample mean of the conditional probabilities and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Mean and standard error, summed in sample order.
pub fn summarize(cond_prob: &[f64]) -> McEstimate {
    let n = cond_prob.len();
    let mean = cond_prob.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let ss: f64 = cond_prob.iter().map(|p| (p - mean) * (p - mean)).sum();
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    McEstimate {
        estimate: mean,
        std_error,
        n_samples: n,
    }
}

pub fn estimate_total_probability(template: &ModelTemplate, cfg: &McConfig) -> Result<McEstimate> {
    Ok(summarize(&run_samples(template, cfg)?.cond_prob))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Fixed-width bins over `[0, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let width = max / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let k = if width > 0.0 {
            ((v / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: width * k as f64,
            hi: if k + 1 == bins {
                max
            } else {
                width * (k + 1) as f64
            },
            count,
        })
        .collect())
}

pub fn conditional_prob_histogram(
    template: &ModelTemplate,
    cfg: &McConfig,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    histogram(&run_samples(template, cfg)?.cond_prob, bins)
}
