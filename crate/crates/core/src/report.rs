//! Structured residual/verdict records shared by every verification suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One verified property.
///
/// For ordinary checks `pass` means `max_residual <= tolerance`. Checks built
/// with [`Report::check_exceeds`] invert this: the measured value must be
/// strictly larger than the threshold (used where a quantity is required to
/// be nonzero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set for [`Report::check_exceeds`] records, whose threshold is not a tolerance.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exceeds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub trials: usize,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(suite: impl Into<String>, trials: usize) -> Self {
        Report {
            suite: suite.into(),
            trials,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records `residual <= tolerance`. A NaN residual fails.
    pub fn check(&mut self, name: &str, anchor: &str, residual: f64, tolerance: f64) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            max_residual: residual,
            tolerance,
            pass,
            exceeds: false,
        });
        pass
    }

    /// Records `value > threshold`.
    pub fn check_exceeds(&mut self, name: &str, anchor: &str, value: f64, threshold: f64) -> bool {
        let pass = value > threshold;
        self.checks.push(Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            max_residual: value,
            tolerance: threshold,
            pass,
            exceeds: true,
        });
        pass
    }

    pub fn check_bool(&mut self, name: &str, anchor: &str, ok: bool) -> bool {
        self.check(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Folds checks with the same name into one record holding the worst residual.
    pub fn record_max(&mut self, name: &str, anchor: &str, residual: f64, tolerance: f64) {
        if let Some(c) = self.checks.iter_mut().find(|c| c.name == name) {
            if residual.is_nan() || residual > c.max_residual || c.max_residual.is_nan() {
                c.max_residual = residual;
            }
            c.pass = c.max_residual <= c.tolerance;
        } else {
            self.check(name, anchor, residual, tolerance);
        }
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.checks.push(Check {
                name: format!("{}/{}", other.suite, c.name),
                ..c
            });
        }
        self.notes.extend(other.notes);
    }

    /// Lowers every tolerance above `cap` to `cap` and re-evaluates; never loosens.
    pub fn tighten(&mut self, cap: f64) {
        for c in self.checks.iter_mut().filter(|c| !c.exceeds && c.tolerance > cap) {
            c.tolerance = cap;
            c.pass = c.max_residual <= cap;
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The failing check with the largest residual-to-tolerance ratio.
    pub fn worst_failure(&self) -> Option<&Check> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
    }

    pub fn into_result(self) -> Result<Report> {
        match self.worst_failure() {
            None => Ok(self),
            Some(c) => Err(Error::IdentityFailure {
                name: c.name.clone(),
                residual: c.max_residual,
                tolerance: c.tolerance,
            }),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per check, `PASS`/`FAIL` first.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}::{} residual={:.3e} tol={:.1e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    self.suite,
                    c.name,
                    c.max_residual,
                    c.tolerance
                )
            })
            .collect()
    }
}

fn ratio(c: &Check) -> f64 {
    if c.max_residual.is_nan() {
        f64::INFINITY
    } else if c.tolerance > 0.0 {
        c.max_residual / c.tolerance
    } else {
        c.max_residual
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: num_complex::Complex64, b: num_complex::Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let mut r = Report::new("t", 1);
        assert!(!r.check("x", "a", f64::NAN, 1.0));
        assert!(!r.passed());
    }

    #[test]
    fn record_max_keeps_worst() {
        let mut r = Report::new("t", 3);
        r.record_max("x", "a", 1e-12, 1e-10);
        r.record_max("x", "a", 1e-9, 1e-10);
        r.record_max("x", "a", 1e-13, 1e-10);
        assert_eq!(r.checks.len(), 1);
        assert_eq!(r.checks[0].max_residual, 1e-9);
        assert!(!r.passed());
        let err = r.into_result().unwrap_err();
        assert!(matches!(err, Error::IdentityFailure { .. }));
    }

    #[test]
    fn tighten_only_lowers() {
        let mut r = Report::new("t", 1);
        r.check("loose", "a", 1e-12, 1e-10);
        r.check("exact", "a", 0.0, 0.0);
        r.check_exceeds("gap", "a", 0.5, 0.1);
        r.tighten(1e-13);
        assert!(!r.get("loose").unwrap().pass);
        assert_eq!(r.get("exact").unwrap().tolerance, 0.0);
        assert!(r.get("gap").unwrap().pass);
        r.tighten(1.0);
        assert_eq!(r.get("loose").unwrap().tolerance, 1e-13);
    }
}
