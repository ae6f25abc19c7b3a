//! Verification suites run by the command-line front end.

pub mod conformal;
pub mod disc;
pub mod index;
pub mod symbols;

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::report::SuiteReport;

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    /// Boundary dimension for the index-set suite.
    pub n: i64,
    /// Fourier band of the disc models.
    pub modes: usize,
    /// Per-axis torus resolution.
    pub grid: usize,
    /// Band of the random conformal factor.
    pub band: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub csv_dir: Option<PathBuf>,
    pub suite_filter: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 2,
            modes: 64,
            grid: 32,
            band: 2,
            amplitude: 0.2,
            seed: 7,
            tol: None,
            csv_dir: None,
            suite_filter: None,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if !(1..=16).contains(&self.n) {
            return bad(format!("--n {} outside 1..=16", self.n));
        }
        if !(8..=256).contains(&self.modes) {
            return bad(format!("--modes {} outside 8..=256", self.modes));
        }
        if !self.grid.is_power_of_two() || !(8..=64).contains(&self.grid) {
            return bad(format!("--grid {} must be a power of two in 8..=64", self.grid));
        }
        if self.band == 0 || self.band > self.grid / 8 {
            return bad(format!("--band {} must lie in 1..={}", self.band, self.grid / 8));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return bad(format!("--amplitude {} outside (0, 1]", self.amplitude));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("--tol {t} must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn suite(&self, name: &str) -> SuiteReport {
        SuiteReport::new(name, self.suite_filter.as_deref(), self.tol)
    }

    pub(crate) fn write_csv(&self, name: &str, body: &str) -> Result<()> {
        if let Some(dir) = &self.csv_dir {
            crate::report::write_atomic(&dir.join(name), body.as_bytes())?;
        }
        Ok(())
    }
}

pub const SUITES: [&str; 4] = ["disc", "symbols", "indexsets", "conformal"];

pub fn run_suite(name: &str, cfg: &Config) -> Result<SuiteReport> {
    match name {
        "disc" => disc::run(cfg),
        "symbols" => symbols::run(cfg),
        "indexsets" => index::run(cfg),
        "conformal" => conformal::run(cfg),
        other => Err(LabError::InvalidParameter(format!("unknown suite {other}"))),
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}
