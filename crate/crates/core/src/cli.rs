//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::AnalysisConfig;
use crate::error::Error;
use crate::report::{emit, run_analysis};

pub const EXIT_OK: i32 = 0;
/// Output could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(
    name = "dsprop",
    version,
    about = "Propagate interval evidence and process noise through polynomial SDEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analysis described by a TOML config.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    pub config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pce_order: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the Monte Carlo comparison.
    #[arg(long)]
    pub no_mc: bool,
}

impl AnalyzeArgs {
    /// Config file contents with the command-line overrides applied.
    pub fn resolve(&self) -> Result<(AnalysisConfig, PathBuf), Error> {
        let mut cfg = AnalysisConfig::load(&self.config)?;
        if let Some(p) = self.pce_order {
            cfg.pce_order = p;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(n) = self.mc_samples {
            cfg.mc.samples = n;
        }
        if let Some(s) = self.seed {
            cfg.mc.seed = s;
        }
        if self.no_mc {
            cfg.mc.enabled = false;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        cfg.validate()?;
        Ok((cfg, out))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<(), (Error, i32)> {
    let (cfg, out) = args.resolve().map_err(|e| {
        // an unreadable config is a config problem, not an output failure
        let code = if e.is_io() {
            EXIT_CONFIG
        } else {
            exit_code(&e)
        };
        (e, code)
    })?;
    let start = Instant::now();
    let report = run_analysis(&cfg).map_err(|e| {
        let code = exit_code(&e);
        (e, code)
    })?;
    log::info!(
        "analysis finished in {:.3} s",
        start.elapsed().as_secs_f64()
    );
    let written = emit(&report, &out).map_err(|e| (e, EXIT_IO))?;

    for t in &report.thresholds {
        print!(
            "P(Y <= {}) : p_bet = {:.6}, nidi = {:.6}",
            t.x_f, t.p_bet, t.nidi
        );
        if let Some(mc) = &t.mc {
            print!(", mc = {:.6} +/- {:.6}", mc.estimate, mc.std_error);
        }
        println!();
    }
    if let Some(n) = &report.niigf {
        println!("niigf = {:.6}", n.value);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Analyze(a) => match analyze(a) {
            Ok(()) => EXIT_OK,
            Err((e, code)) => {
                eprintln!("error: {e}");
                code
            }
        },
    }
}
