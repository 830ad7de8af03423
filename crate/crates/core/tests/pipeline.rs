use std::path::PathBuf;

use dsprop::config::AnalysisConfig;
use dsprop::gauss_pbox::{
    ignorance_at, induce_pbox_set, linspace, niigf_detail, normal_cdf, pignistic_cdf,
    DEFAULT_GRID_POINTS,
};
use dsprop::interval_ds::DsStructure;
use dsprop::moment_dynamics::linear_exact;
use dsprop::report::{emit, run_analysis, REPORT_FILE};

fn example_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml")
}

fn example(samples: usize) -> AnalysisConfig {
    let mut cfg = AnalysisConfig::load(&example_path()).unwrap();
    cfg.mc.samples = samples;
    cfg
}

const SCALAR: &str = r#"
t_final = 2.0
thresholds = [-0.5, 0.0, 0.5]
[model]
alpha = [0.9]
q = 0.3
initial = { kind = "raw", m1 = 1.1, m2 = 2.42 }
[grid]
points = 101
"#;

#[test]
fn example_report_reproduces_the_worked_example() {
    let r = run_analysis(&example(20_000)).unwrap();
    let want = [
        ([0.182, 0.197], [0.055, 0.090], 0.12),
        ([0.161, 0.186], [0.047, 0.084], 0.48),
        ([0.182, 0.197], [0.082, 0.129], 0.08),
        ([0.161, 0.186], [0.076, 0.122], 0.32),
    ];
    assert_eq!(r.focal_elements.len(), 4);
    for (f, (mu, v, m)) in r.focal_elements.iter().zip(want) {
        assert!((f.mass - m).abs() < 1e-15);
        assert!((f.mu.lo() - mu[0]).abs() <= 0.005 && (f.mu.hi() - mu[1]).abs() <= 0.005);
        assert!((f.sigma_sq.lo() - v[0]).abs() <= 0.005 && (f.sigma_sq.hi() - v[1]).abs() <= 0.005);
    }
    let t = &r.thresholds[0];
    assert!((t.p_bet - 0.0107).abs() <= 0.0005);
    assert!((t.nidi - 0.0156).abs() <= 0.002);
    let mc = t.mc.as_ref().unwrap();
    assert!((mc.estimate - 0.0085).abs() <= 0.0005);
    assert_eq!(mc.histogram.iter().map(|b| b.count).sum::<u64>(), 20_000);
    // histogram support stays inside the global envelope of the slice
    let occupied: Vec<_> = mc.histogram.iter().filter(|b| b.count > 0).collect();
    assert!(
        occupied[0].hi >= t.bounds.lo() && occupied[occupied.len() - 1].hi <= t.bounds.hi() + 1e-12
    );
    let n = r.niigf.unwrap().value;
    assert!(n > 0.0 && n < 0.2);
}

#[test]
fn all_scalar_config_is_a_single_gaussian() {
    let cfg = AnalysisConfig::from_toml_str(SCALAR).unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.focal_elements.len(), 1);
    assert!(r.epistemic_inputs.is_empty());
    let s = linear_exact(0.9, 0.09, 1.1, 2.42, 2.0).unwrap();
    for t in &r.thresholds {
        assert_eq!(t.nidi, 0.0);
        assert_eq!(t.nidi_support, 0.0);
        assert!((t.p_bet - normal_cdf(t.x_f, s.mean(), s.variance())).abs() < 1e-9);
    }
}

#[test]
fn single_interval_reduces_to_one_pbox() {
    let text = SCALAR.replace("alpha = [0.9]", "alpha = [{ lo = 0.86, hi = 0.96 }]");
    let cfg = AnalysisConfig::from_toml_str(&text).unwrap();
    let r = run_analysis(&cfg).unwrap();
    assert_eq!(r.focal_elements.len(), 1);
    assert_eq!(r.focal_elements[0].mass, 1.0);

    let direct = induce_pbox_set(&DsStructure::certain(r.moments.items()[0].0));
    let grid = dsprop::gauss_pbox::default_grid(&direct);
    let n = niigf_detail(&direct, 0.05, &grid, DEFAULT_GRID_POINTS).unwrap();
    assert_eq!(r.niigf.unwrap(), n);

    // NIigF is the window-normalized trapezoid of IgF
    let xs = linspace(n.x_min, n.x_max, 4001);
    let h = (n.x_max - n.x_min) / 4000.0;
    let ig: Vec<f64> = xs.iter().map(|&x| ignorance_at(&direct, x)).collect();
    let integral = h * (ig.iter().sum::<f64>() - 0.5 * (ig[0] + ig[4000]));
    assert!((integral / (n.x_max - n.x_min) - n.value).abs() < 1e-6);
}

#[test]
fn report_matches_in_memory_structures() {
    let cfg = example(2_000);
    let r = run_analysis(&cfg).unwrap();
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for (i, (g, m)) in r.moments.items().iter().enumerate() {
        let f = &json["focal_elements"][i];
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-11 * b.abs().max(1e-300);
        assert!(rel(f["mass"].as_f64().unwrap(), *m));
        assert!(rel(f["mu"][0].as_f64().unwrap(), g.mu.lo()));
        assert!(rel(f["sigma_sq"][1].as_f64().unwrap(), g.sigma_sq.hi()));
    }
    let total: f64 = r.moments.masses().sum();
    assert!((total - 1.0).abs() <= 1e-9);
    let echo: AnalysisConfig =
        serde_json::from_value(json["provenance"]["config"].clone()).unwrap();
    assert_eq!(echo, cfg);
    assert_eq!(
        AnalysisConfig::from_toml_str(&echo.to_toml_string()).unwrap(),
        cfg
    );

    let grid = &r.curve_data.as_ref().unwrap().grid;
    assert_eq!(
        pignistic_cdf(&r.pboxes, grid).unwrap(),
        r.curve_data.as_ref().unwrap().p_bet
    );
}

#[test]
fn emitted_files() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_analysis(&example(2_000)).unwrap();
    let written = emit(&r, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            REPORT_FILE,
            "pignistic_cdf.csv",
            "envelope_0.csv",
            "envelope_1.csv",
            "envelope_2.csv",
            "envelope_3.csv",
            "ignorance.csv",
            "mc_histogram_0.csv"
        ]
    );
    let cdf = std::fs::read_to_string(dir.path().join("pignistic_cdf.csv")).unwrap();
    assert!(cdf.starts_with("x,p_bet\n") && !cdf.contains('\r'));
    assert_eq!(cdf.lines().count(), 2002);
    let env = std::fs::read_to_string(dir.path().join("envelope_2.csv")).unwrap();
    for line in env.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(v.len() == 3 && v[1] <= v[2]);
    }
    // only finished files, no temporaries
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), names.len());
}

#[test]
fn thresholds_only_writes_the_report() {
    let mut cfg = example(1_000);
    cfg.grid = None;
    let dir = tempfile::tempdir().unwrap();
    let written = emit(&run_analysis(&cfg).unwrap(), dir.path()).unwrap();
    assert_eq!(written, vec![dir.path().join(REPORT_FILE)]);
}

#[test]
fn errors_name_the_stage_and_focal() {
    // a strongly unstable cubic blows through the variance check
    let text = r#"
t_final = 5.0
dt = 0.1
thresholds = [0.0]
[model]
alpha = [0.0, 0.0, { ds = [{ lo = 4.0, hi = 5.0, mass = 0.5 }, { lo = 40.0, hi = 50.0, mass = 0.5 }] }]
q = 0.0
initial = { kind = "raw", m1 = 2.0, m2 = 4.000001 }
"#;
    let cfg = AnalysisConfig::from_toml_str(text).unwrap();
    let err = run_analysis(&cfg).unwrap_err();
    let msg = err.to_string();
    assert!(
        msg.contains("propagate") && msg.contains("focal element"),
        "{msg}"
    );
    assert!(!err.is_config());
}
