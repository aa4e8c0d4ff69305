//! Structured pass/fail records shared by all verification routines.

use std::fmt;

/// One measured quantity. `tolerance`/`satisfied` are set only for
/// quantities that participate in the pass/fail verdict; purely
/// informational entries leave them unset.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub satisfied: Option<bool>,
}

/// Pass/fail record: passes iff every checked measurement is satisfied.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), measurements: Vec::new(), notes: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.measurements.iter().all(|m| m.satisfied.unwrap_or(true))
    }

    /// Informational entry, does not affect the verdict.
    pub fn record(&mut self, quantity: impl Into<String>, value: f64) {
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            tolerance: None,
            satisfied: None,
        });
    }

    /// Checked entry: |value| must be <= tol.
    pub fn check_le(&mut self, quantity: impl Into<String>, value: f64, tol: f64) {
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            tolerance: Some(tol),
            satisfied: Some(value.abs() <= tol),
        });
    }

    /// Checked entry: value must be strictly greater than `bound`.
    pub fn check_gt(&mut self, quantity: impl Into<String>, value: f64, bound: f64) {
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            tolerance: Some(bound),
            satisfied: Some(value > bound),
        });
    }

    /// Checked entry with an externally decided verdict.
    pub fn check_that(&mut self, quantity: impl Into<String>, value: f64, ok: bool) {
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            tolerance: None,
            satisfied: Some(ok),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", if self.pass() { "PASS" } else { "FAIL" }, self.name)?;
        for m in &self.measurements {
            match (m.tolerance, m.satisfied) {
                (Some(tol), Some(ok)) => writeln!(
                    f,
                    "  {} {:<48} = {:.6e}  (tol {:.3e})",
                    if ok { "ok  " } else { "FAIL" },
                    m.quantity,
                    m.value,
                    tol
                )?,
                (None, Some(ok)) => writeln!(
                    f,
                    "  {} {:<48} = {:.6e}",
                    if ok { "ok  " } else { "FAIL" },
                    m.quantity,
                    m.value
                )?,
                _ => writeln!(f, "  info {:<48} = {:.6e}", m.quantity, m.value)?,
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
