//! End-to-end analysis and its on-disk artifacts.
//!
//! `report.json` holds every structure the pipeline produced; numbers are
//! rounded to 12 significant digits except inside `provenance.config`, which
//! echoes the configuration verbatim. Curve files are comma-separated with a
//! header row:
//!
//! | file | columns |
//! |---|---|
//! | `pignistic_cdf.csv` | `x,p_bet` |
//! | `envelope_<i>.csv` | `x,lower,upper` for focal element `i` |
//! | `ignorance.csv` | `x,igf,nidi` |
//! | `mc_histogram_<k>.csv` | `bin_lo,bin_hi,count` for threshold `k` |

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::gauss_pbox::{
    default_grid, default_range, ignorance_function, induce_pbox_set, linspace, niigf_detail,
    pignistic_cdf, slice_at, IgnoranceCurve, Niigf, PBoxSet, DEFAULT_GRID_POINTS,
};
use crate::interval_ds::{
    convolve_independent, nidi, nidi_on_domain, pignistic_expectation, DsStructure, Interval,
};
use crate::mc_oracle::{histogram, run_samples, summarize, HistogramBin, McConfig};
use crate::pce::{GaussianBox, Propagator};

pub const REPORT_FILE: &str = "report.json";

/// A focal element written as `{lo, hi, mass}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocalEntry {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl FocalEntry {
    fn from_ds(ds: &DsStructure<Interval>) -> Vec<Self> {
        ds.items()
            .iter()
            .map(|(i, m)| FocalEntry {
                lo: i.lo(),
                hi: i.hi(),
                mass: *m,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputReport {
    pub slot: String,
    pub focals: Vec<FocalEntry>,
}

/// One propagated focal element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalReport {
    pub index: usize,
    pub mass: f64,
    /// Input box, one interval per epistemic input.
    pub inputs: Vec<Interval>,
    pub mu: Interval,
    pub sigma_sq: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub x_f: f64,
    pub p_bet: f64,
    /// Ignorance of the slice normalized by the probability range `[0, 1]`.
    pub nidi: f64,
    /// Ignorance of the slice normalized by its own support; 0 for a point.
    pub nidi_support: f64,
    /// Hull of the slice: the loosest bounds on `P(Y ≤ x_f)`.
    pub bounds: Interval,
    pub slice: Vec<FocalEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveInfo {
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: AnalysisConfig,
}

/// Sampled curves backing the CSV outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub grid: Vec<f64>,
    pub p_bet: Vec<f64>,
    /// `(lowerN_i, upperN_i)` per focal element.
    pub envelopes: Vec<(Vec<f64>, Vec<f64>)>,
    pub ignorance: IgnoranceCurve,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub epistemic_inputs: Vec<InputReport>,
    pub focal_elements: Vec<FocalReport>,
    pub thresholds: Vec<ThresholdReport>,
    pub niigf: Option<Niigf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurveInfo>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub moments: DsStructure<GaussianBox>,
    #[serde(skip)]
    pub pboxes: PBoxSet,
    #[serde(skip)]
    pub curve_data: Option<CurveData>,
}

fn envelope_file(i: usize) -> String {
    format!("envelope_{i}.csv")
}

fn histogram_file(k: usize) -> String {
    format!("mc_histogram_{k}.csv")
}

/// Run the whole pipeline. Errors carry the stage and, where it applies, the
/// focal element index.
pub fn run_analysis(cfg: &AnalysisConfig) -> Result<Report> {
    cfg.validate()?;
    let template = cfg.template()?;
    let epistemic = template.epistemic();
    let epistemic_inputs = epistemic
        .iter()
        .map(|(slot, ds)| InputReport {
            slot: slot.to_string(),
            focals: FocalEntry::from_ds(ds),
        })
        .collect();

    let boxes: Vec<(Vec<Interval>, f64)> = if epistemic.is_empty() {
        vec![(Vec::new(), 1.0)]
    } else {
        let factors: Vec<DsStructure<Interval>> =
            epistemic.iter().map(|(_, ds)| (*ds).clone()).collect();
        convolve_independent(&factors)
            .map_err(|e| e.at_stage("convolve", None))?
            .items()
            .iter()
            .map(|(b, m)| (b.dims().to_vec(), *m))
            .collect()
    };
    log::info!("propagating {} focal element(s)", boxes.len());

    let propagator = Propagator::new(template.clone(), cfg.propagation())
        .map_err(|e| e.at_stage("basis", None))?;
    let propagated: Vec<Result<GaussianBox>> = boxes
        .par_iter()
        .enumerate()
        .map(|(i, (dims, _))| {
            propagator
                .propagate(dims, cfg.t_final)
                .map_err(|e| e.at_stage("propagate", Some(i)))
        })
        .collect();
    let mut items = Vec::with_capacity(boxes.len());
    for (g, (_, m)) in propagated.into_iter().zip(&boxes) {
        items.push((g?, *m));
    }
    let moments = DsStructure::new(items).map_err(|e| e.at_stage("propagate", None))?;
    let pboxes = induce_pbox_set(&moments);

    let focal_elements = moments
        .items()
        .iter()
        .zip(&boxes)
        .enumerate()
        .map(|(index, ((g, mass), (dims, _)))| FocalReport {
            index,
            mass: *mass,
            inputs: dims.clone(),
            mu: g.mu,
            sigma_sq: g.sigma_sq,
        })
        .collect();

    let unit = Interval::new(0.0, 1.0).expect("unit interval");
    let mut thresholds = Vec::with_capacity(cfg.thresholds.len());
    for &x_f in &cfg.thresholds {
        let slice = slice_at(&pboxes, x_f);
        let nidi_support = match nidi(&slice) {
            Ok(v) => v,
            Err(Error::DegenerateSupport { .. }) => 0.0,
            Err(e) => return Err(e.at_stage("threshold", None)),
        };
        thresholds.push(ThresholdReport {
            x_f,
            p_bet: pignistic_expectation(&slice),
            nidi: nidi_on_domain(&slice, unit).map_err(|e| e.at_stage("threshold", None))?,
            nidi_support,
            bounds: slice.support(),
            slice: FocalEntry::from_ds(&slice),
            mc: None,
        });
    }

    let niigf = match niigf_detail(
        &pboxes,
        cfg.ignorance_percentile,
        &default_grid(&pboxes),
        DEFAULT_GRID_POINTS,
    ) {
        Ok(v) => Some(v),
        Err(Error::DegenerateRange { x_min, x_max }) => {
            log::warn!("NIigF skipped: percentile window [{x_min}, {x_max}] is empty");
            None
        }
        Err(e) => return Err(e.at_stage("niigf", None)),
    };

    let mut histograms = Vec::new();
    if cfg.mc.enabled {
        let mc = McConfig {
            n_samples: cfg.mc.samples,
            seed: cfg.mc.seed,
            x_f: cfg.thresholds[0],
            t_final: cfg.t_final,
            dt: cfg.dt,
        };
        log::info!("Monte Carlo with {} samples", mc.n_samples);
        let samples = run_samples(&template, &mc).map_err(|e| e.at_stage("monte_carlo", None))?;
        for (k, t) in thresholds.iter_mut().enumerate() {
            let probs = if k == 0 {
                samples.cond_prob.clone()
            } else {
                samples.conditional_probs(t.x_f)
            };
            let est = summarize(&probs);
            let hist =
                histogram(&probs, cfg.mc.bins).map_err(|e| e.at_stage("monte_carlo", None))?;
            histograms.push(hist.clone());
            t.mc = Some(McReport {
                estimate: est.estimate,
                std_error: est.std_error,
                n_samples: est.n_samples,
                seed: cfg.mc.seed,
                histogram: hist,
            });
        }
    }

    let (curves, curve_data) = match &cfg.grid {
        None => (None, None),
        Some(g) => {
            let (auto_lo, auto_hi) = default_range(&pboxes);
            let lo = g.lo.unwrap_or(auto_lo);
            let hi = g.hi.unwrap_or(auto_hi);
            if lo >= hi {
                return Err(Error::Config(format!("grid lo {lo} must be below hi {hi}"))
                    .at_stage("curves", None));
            }
            let grid = linspace(lo, hi, g.points);
            let p_bet = pignistic_cdf(&pboxes, &grid).map_err(|e| e.at_stage("curves", None))?;
            let envelopes = pboxes
                .focals()
                .map(|p| grid.iter().map(|&x| p.bounds(x)).unzip())
                .collect();
            let ignorance =
                ignorance_function(&pboxes, &grid).map_err(|e| e.at_stage("curves", None))?;
            let mut files = vec!["pignistic_cdf.csv".to_string()];
            files.extend((0..pboxes.len()).map(envelope_file));
            files.push("ignorance.csv".to_string());
            files.extend((0..histograms.len()).map(histogram_file));
            (
                Some(CurveInfo {
                    points: g.points,
                    lo,
                    hi,
                    files,
                }),
                Some(CurveData {
                    grid,
                    p_bet,
                    envelopes,
                    ignorance,
                }),
            )
        }
    };

    Ok(Report {
        epistemic_inputs,
        focal_elements,
        thresholds,
        niigf,
        curves,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
        },
        moments,
        pboxes,
        curve_data,
    })
}

/// Round to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

/// `x` with 12 significant digits in the shortest of fixed or exponent form,
/// trailing zeros removed.
pub fn fmt_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig12(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.iter_mut().for_each(|(_, v)| round_value(v)),
        _ => {}
    }
}

impl Report {
    /// The JSON document written to `report.json`.
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        let config = value
            .get_mut("provenance")
            .and_then(|p| p.get_mut("config"))
            .map(Value::take);
        round_value(&mut value);
        if let Some(c) = config {
            value["provenance"]["config"] = c;
        }
        let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
        text.push('\n');
        text
    }

    /// Every output file name and its contents, in write order.
    pub fn artifacts(&self) -> Vec<(String, String)> {
        let mut out = vec![(REPORT_FILE.to_string(), self.to_json())];
        let Some(c) = &self.curve_data else {
            return out;
        };
        out.push((
            "pignistic_cdf.csv".into(),
            csv(
                &["x", "p_bet"],
                c.grid.iter().zip(&c.p_bet).map(|(x, p)| vec![*x, *p]),
            ),
        ));
        for (i, (lo, hi)) in c.envelopes.iter().enumerate() {
            out.push((
                envelope_file(i),
                csv(
                    &["x", "lower", "upper"],
                    (0..c.grid.len()).map(|j| vec![c.grid[j], lo[j], hi[j]]),
                ),
            ));
        }
        let ig = &c.ignorance;
        out.push((
            "ignorance.csv".into(),
            csv(
                &["x", "igf", "nidi"],
                (0..ig.grid.len()).map(|j| vec![ig.grid[j], ig.igf[j], ig.nidi_at[j]]),
            ),
        ));
        for (k, t) in self.thresholds.iter().enumerate() {
            if let Some(mc) = &t.mc {
                out.push((
                    histogram_file(k),
                    csv(
                        &["bin_lo", "bin_hi", "count"],
                        mc.histogram
                            .iter()
                            .map(|b| vec![b.lo, b.hi, b.count as f64]),
                    ),
                ));
            }
        }
        out
    }
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_sig12(*v)).collect();
        writeln!(s, "{}", cells.join(",")).expect("writing to a String");
    }
    s
}

/// Write `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

/// Write all artifacts under `dir`, creating it if needed.
pub fn emit(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, contents) in report.artifacts() {
        let path = dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(-0.5), "-0.5");
        assert_eq!(fmt_sig12(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(123456.789), "123456.789");
        assert_eq!(fmt_sig12(1e-7), "1e-7");
        assert_eq!(fmt_sig12(1.234e15), "1.234e15");
        assert_eq!(fmt_sig12(0.000123456789012345), "0.000123456789012");
        assert_eq!(fmt_sig12(1000000.0), "1000000");
        for x in [
            0.010825230353113557,
            -1.5e-300,
            7.0e11,
            std::f64::consts::PI,
        ] {
            let back: f64 = fmt_sig12(x).parse().unwrap();
            assert_eq!(back, round_sig12(x));
        }
    }

    #[test]
    fn rounding_spares_the_config_echo() {
        let mut v = serde_json::json!({"a": 0.1234567890123456, "provenance": {"config": {"b": 0.1234567890123456}}});
        round_value(&mut v);
        assert_eq!(v["a"].as_f64().unwrap(), 0.123456789012);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one\n").unwrap();
        write_atomic(&p, b"two\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
