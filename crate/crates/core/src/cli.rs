//! Command-line front end. Exit codes: 0 all cases pass, 1 a case failed,
//! 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::LabError;
use crate::report::{write_atomic, Report};
use crate::suites::{run_suite, Config, SUITES};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "calderon-lab", version, about = "Verification suites for Calderón and Bergman projectors")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Boundary dimension for the index-set suite.
    #[arg(long, global = true, default_value_t = 2)]
    n: i64,
    /// Fourier band of the disc models.
    #[arg(long, global = true, default_value_t = 64)]
    modes: usize,
    /// Per-axis torus resolution (power of two).
    #[arg(long, global = true, default_value_t = 32)]
    grid: usize,
    /// Band of the random conformal factor.
    #[arg(long, global = true, default_value_t = 2)]
    band: usize,
    /// Bound on sup |ω|.
    #[arg(long, global = true, default_value_t = 0.2)]
    amplitude: f64,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Overrides every residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// JSON report path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for CSV exports.
    #[arg(long, global = true)]
    csv_dir: Option<PathBuf>,
    /// Only run cases whose "suite/case" id contains this string.
    #[arg(long, global = true)]
    suite_filter: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Disc-model spectra, kernels and brute-force projectors.
    Disc,
    /// Principal-symbol calculus.
    Symbols,
    /// Index-set composition for the Bergman kernel.
    Indexsets,
    /// Conformal covariance on the 3-torus.
    Conformal,
    /// Every suite.
    All,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Disc => "disc",
            Cmd::Symbols => "symbols",
            Cmd::Indexsets => "indexsets",
            Cmd::Conformal => "conformal",
            Cmd::All => "all",
        }
    }
}

fn exit_for(e: &LabError) -> i32 {
    match e {
        LabError::Io(_) => EXIT_IO,
        LabError::InvalidParameter(_) | LabError::InvalidDimension(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cfg = Config {
        n: cli.n,
        modes: cli.modes,
        grid: cli.grid,
        band: cli.band,
        amplitude: cli.amplitude,
        seed: cli.seed,
        tol: cli.tol,
        csv_dir: cli.csv_dir.clone(),
        suite_filter: cli.suite_filter.clone(),
    };
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if let Some(dir) = &cfg.csv_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            let _ = writeln!(err, "error: {}: {e}", dir.display());
            return EXIT_IO;
        }
    }
    let names: Vec<&str> = match cli.command {
        Cmd::All => SUITES.to_vec(),
        c => vec![c.name()],
    };
    let mut suites = Vec::new();
    for name in names {
        match run_suite(name, &cfg) {
            Ok(s) => {
                let _ = writeln!(out, "{:<10} {}/{} passed", s.suite, s.summary.passed, s.summary.total);
                for r in s.rows.iter().filter(|r| !r.pass) {
                    let why = r.failure.clone().unwrap_or_else(|| format!("error {:.3e} > tol {:.3e}", r.error, r.tolerance));
                    let _ = writeln!(out, "  FAIL {}: {why}", r.id);
                }
                suites.push(s);
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return exit_for(&e);
            }
        }
    }
    let config = json!({
        "n": cfg.n, "modes": cfg.modes, "grid": cfg.grid, "band": cfg.band,
        "amplitude": cfg.amplitude, "tol": cfg.tol, "suite_filter": cfg.suite_filter,
    });
    let report = Report::new(cli.command.name(), cfg.seed, config, suites);
    if let Some(path) = &cli.out {
        if let Err(e) = write_atomic(path, report.to_json().as_bytes()) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_IO;
        }
    }
    if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
