//! Experiment reports and deterministic file emission.
//!
//! Reports are bitwise deterministic for identical config + seeds: maps are
//! key-sorted, floats serialize via shortest round-trip, and the runtime
//! stats are iteration/step counters rather than wall-clock times (timing
//! goes to stderr only).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

/// One named inequality with its measured margin (≥ 0 iff it holds, unless
/// the check is a plain boolean, in which case the margin restates it).
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub inequality: String,
    pub pass: bool,
    pub margin: f64,
}

impl Verdict {
    pub fn from_margin(name: &str, inequality: &str, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            inequality: inequality.to_string(),
            pass: margin >= 0.0,
            margin: sanitize(margin),
        }
    }

    pub fn from_bool(name: &str, inequality: &str, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            inequality: inequality.to_string(),
            pass,
            margin: if pass { 0.0 } else { -1.0 },
        }
    }
}

/// Deterministic work counters.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RuntimeStats {
    pub newton_iterations: u64,
    pub linear_iterations: u64,
    pub flow_steps: u64,
    pub rhs_evaluations: u64,
}

impl RuntimeStats {
    pub fn absorb_elliptic(&mut self, report: &crate::elliptic::EllipticReport) {
        self.newton_iterations += report.newton_iters as u64;
        self.linear_iterations += report.linear_iters;
    }

    pub fn absorb_flow(&mut self, traj: &crate::flow::Trajectory) {
        self.flow_steps += traj.steps;
        self.rhs_evaluations += traj.rhs_evals;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub all_pass: bool,
    pub verdicts: Vec<Verdict>,
    pub measured: Map<String, Value>,
    pub files: Vec<String>,
    pub runtime: RuntimeStats,
    pub config: Value,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            all_pass: true,
            verdicts: Vec::new(),
            measured: Map::new(),
            files: Vec::new(),
            runtime: RuntimeStats::default(),
            config,
        }
    }

    pub fn push_verdict(&mut self, v: Verdict) {
        self.all_pass &= v.pass;
        self.verdicts.push(v);
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.measured.insert(key.to_string(), value);
    }

    pub fn record_f64(&mut self, key: &str, value: f64) {
        self.record(key, json_f64(value));
    }

    pub fn record_file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    /// Serializes to `report.json` in `dir` (atomic) and returns the path.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("report.json");
        let body = serde_json::to_string_pretty(self).expect("report serializes");
        write_atomic(&path, body.as_bytes())?;
        Ok(path)
    }
}

/// JSON has no NaN/∞; clamp to the largest finite value with the right sign
/// so a pathological margin still serializes (and still fails its verdict).
fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        -f64::MAX
    } else if x.is_infinite() {
        f64::MAX.copysign(x)
    } else {
        x
    }
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(sanitize(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// CSV emission with deterministic float formatting (shortest round-trip);
/// `None` cells print as "undefined".
pub struct CsvWriter {
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "csv row arity mismatch");
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            match c {
                CsvCell::F(v) => self.buf.push_str(&format!("{v}")),
                CsvCell::I(v) => self.buf.push_str(&format!("{v}")),
                CsvCell::S(v) => self.buf.push_str(v),
                CsvCell::Opt(Some(v)) => self.buf.push_str(&format!("{v}")),
                CsvCell::Opt(None) => self.buf.push_str("undefined"),
            }
        }
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.buf.as_bytes())
    }
}

pub enum CsvCell {
    F(f64),
    I(i64),
    S(String),
    Opt(Option<f64>),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_gate_all_pass() {
        let mut r = ExperimentReport::new("demo", Value::Null);
        r.push_verdict(Verdict::from_margin("a", "x ≤ y", 0.5));
        assert!(r.all_pass);
        r.push_verdict(Verdict::from_margin("b", "x ≤ y", -0.1));
        assert!(!r.all_pass);
    }

    #[test]
    fn report_serialization_is_deterministic() {
        let build = || {
            let mut r = ExperimentReport::new("demo", serde_json::json!({"k": 1}));
            r.record_f64("zeta", 0.1 + 0.2);
            r.record_f64("alpha", 1.0 / 3.0);
            r.push_verdict(Verdict::from_margin("m", "lhs ≤ rhs", 1e-9));
            serde_json::to_string_pretty(&r).unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn csv_formats_undefined() {
        let mut w = CsvWriter::new(&["t", "v"]);
        w.row(&[CsvCell::F(0.5), CsvCell::Opt(None)]);
        w.row(&[CsvCell::F(1.0), CsvCell::Opt(Some(2.25))]);
        assert_eq!(w.buf, "t,v\n0.5,undefined\n1,2.25\n");
    }
}
