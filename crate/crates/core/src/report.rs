//! Machine-readable reports. Every real number is written with 17 significant
//! digits, which is enough to read back the identical `f64`.

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::linalg::Matrix;
use crate::scf::{IterationRecord, ScfSolution};

/// `f64` that serializes in `{:.16e}` form; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(S::Error::custom)?
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Real(
            Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::NAN),
        ))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real(x)
    }
}

pub fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

/// Row-major nested arrays.
pub fn matrix_rows(a: &Matrix) -> Vec<Vec<Real>> {
    a.row_iter()
        .map(|r| r.iter().copied().map(Real).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: Real,
    pub grad_max: Real,
    pub step: Real,
    pub idem_residual: Real,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iter: r.iteration,
            energy: Real(r.energy),
            grad_max: Real(r.gradient_max),
            step: Real(r.step),
            idem_residual: Real(r.idempotency_residual),
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub system_label: String,
    pub solver: String,
    pub converged: bool,
    pub energy: Real,
    pub gradient_norm: Real,
    pub iteration_count: usize,
    pub orbital_energies: Vec<Real>,
    pub occupied_count: usize,
    pub density: Vec<Vec<Real>>,
    pub coefficients: Vec<Vec<Real>>,
    pub trace: Vec<TraceRow>,
    pub stall_reason: Option<String>,
    /// Seconds; only filled in on request so that reports stay reproducible.
    pub wall_time: Option<Real>,
}

impl RunReport {
    pub fn new(label: &str, solution: &ScfSolution, wall_time: Option<f64>) -> Self {
        Self {
            system_label: label.to_string(),
            solver: solution.solver.name().to_string(),
            converged: solution.converged,
            energy: Real(solution.energy),
            gradient_norm: Real(solution.gradient_max),
            iteration_count: solution.iterations,
            orbital_energies: reals(&solution.orbital_energies),
            occupied_count: solution.occupied_count,
            density: matrix_rows(solution.density.matrix()),
            coefficients: matrix_rows(&solution.coefficients),
            trace: solution.trace.iter().map(TraceRow::from).collect(),
            stall_reason: solution.stall_reason.clone(),
            wall_time: wall_time.map(Real),
        }
    }
}

/// Both solvers on one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub roothaan: RunReport,
    pub density_descent: RunReport,
    pub energy_delta: Real,
    pub density_max_delta: Real,
}

/// A named residual against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: Real,
    pub threshold: Real,
    pub passed: bool,
}

impl Residual {
    pub fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value: Real(value),
            threshold: Real(threshold),
            passed: value.is_finite() && value < threshold,
        }
    }
}

/// Residual table for `check` and `oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub system_label: String,
    pub command: String,
    pub solver: Option<String>,
    pub converged: Option<bool>,
    pub energy: Option<Real>,
    pub residuals: Vec<Residual>,
    pub passed: bool,
}

impl ResidualReport {
    pub fn new(label: &str, command: &str, residuals: Vec<Residual>) -> Self {
        let passed = residuals.iter().all(|r| r.passed);
        Self {
            system_label: label.to_string(),
            command: command.to_string(),
            solver: None,
            converged: None,
            energy: None,
            residuals,
            passed,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Iteration trace as CSV. With `solver` set, a leading `solver` column is
/// added so several traces can share one file.
pub fn trace_csv(traces: &[(Option<&str>, &[IterationRecord])]) -> String {
    let tagged = traces.iter().any(|(s, _)| s.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["iter", "energy", "grad_max", "step", "idem_residual"];
    if tagged {
        header.insert(0, "solver");
    }
    w.write_record(&header).expect("in-memory write");
    for (solver, trace) in traces {
        for r in trace.iter() {
            let mut row = vec![
                r.iteration.to_string(),
                format!("{:.16e}", r.energy),
                format!("{:.16e}", r.gradient_max),
                format!("{:.16e}", r.step),
                format!("{:.16e}", r.idempotency_residual),
            ];
            if tagged {
                row.insert(0, solver.unwrap_or("").to_string());
            }
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}
