//! Suite reports: one row per case, JSON serialization and atomic writes.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::LabError;

pub const SCHEMA: u32 = 1;

/// How the scalar `error` of a row was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Absolute,
    Relative,
    /// error / allowed bound, compared against 1.
    BoundRatio,
    /// 0 when the exact comparison holds, 1 otherwise.
    Exact,
    /// threshold / observed for checks that need a large observed value.
    InverseMargin,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRow {
    pub id: String,
    pub parameters: Value,
    pub computed: Value,
    pub expected: Value,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    pub error: f64,
    pub error_kind: ErrorKind,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    tunable: bool,
}

impl CaseRow {
    pub fn new(id: &str, error: f64, kind: ErrorKind, tolerance: f64) -> Self {
        CaseRow {
            id: id.to_string(),
            parameters: Value::Null,
            computed: Value::Null,
            expected: Value::Null,
            abs_error: None,
            rel_error: None,
            error,
            error_kind: kind,
            tolerance,
            pass: false,
            provenance: String::new(),
            failure: None,
            wall_time_s: 0.0,
            tunable: matches!(kind, ErrorKind::Absolute | ErrorKind::Relative),
        }
    }

    /// Residual-style row: passes when the residual is at most `tol`.
    pub fn residual(id: &str, value: f64, tol: f64) -> Self {
        CaseRow::new(id, value, ErrorKind::Absolute, tol).computed(json!(value)).abs(value)
    }

    pub fn exact(id: &str, ok: bool) -> Self {
        CaseRow::new(id, if ok { 0.0 } else { 1.0 }, ErrorKind::Exact, 0.0)
    }

    pub fn params(mut self, v: Value) -> Self {
        self.parameters = v;
        self
    }

    pub fn computed(mut self, v: Value) -> Self {
        self.computed = v;
        self
    }

    pub fn expected(mut self, v: Value) -> Self {
        self.expected = v;
        self
    }

    pub fn abs(mut self, e: f64) -> Self {
        self.abs_error = Some(e);
        self
    }

    pub fn rel(mut self, e: f64) -> Self {
        self.rel_error = Some(e);
        self
    }

    pub fn provenance(mut self, p: &str) -> Self {
        self.provenance = p.to_string();
        self
    }

    fn finalize(&mut self, tol_override: Option<f64>) {
        if let (Some(t), true) = (tol_override, self.tunable) {
            self.tolerance = t;
        }
        self.pass = self.failure.is_none() && self.error.is_finite() && self.error <= self.tolerance;
    }
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    fn add(&mut self, other: &Summary) {
        self.total += other.total;
        self.passed += other.passed;
        self.failed += other.failed;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<CaseRow>,
    pub summary: Summary,
    #[serde(skip)]
    filter: Option<String>,
    #[serde(skip)]
    tol_override: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: &str, filter: Option<&str>, tol_override: Option<f64>) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            rows: Vec::new(),
            summary: Summary::default(),
            filter: filter.map(str::to_string),
            tol_override,
        }
    }

    pub fn wants(&self, id: &str) -> bool {
        match &self.filter {
            None => true,
            Some(f) => format!("{}/{}", self.suite, id).contains(f.as_str()),
        }
    }

    /// Runs one case, timing it; errors become failed rows.
    pub fn case(&mut self, id: &str, f: impl FnOnce() -> crate::Result<CaseRow>) {
        if !self.wants(id) {
            return;
        }
        let t = Instant::now();
        let mut row = match f() {
            Ok(r) => r,
            Err(e) => {
                let mut r = CaseRow::new(id, f64::INFINITY, ErrorKind::Exact, 0.0);
                r.failure = Some(e.to_string());
                r
            }
        };
        row.id = id.to_string();
        row.wall_time_s = t.elapsed().as_secs_f64();
        row.finalize(self.tol_override);
        self.summary.total += 1;
        if row.pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, seed: u64, config: Value, suites: Vec<SuiteReport>) -> Self {
        let mut summary = Summary::default();
        for s in &suites {
            summary.add(&s.summary);
        }
        Report { schema: SCHEMA, command: command.to_string(), seed, config, suites, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::result::Result<(), LabError> {
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| LabError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}
