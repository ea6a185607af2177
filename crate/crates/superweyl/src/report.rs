//! Pass/fail records shared by the verification suites.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Residual, mismatch count or computed value.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Exact identity checked over `total` cases with `failures` mismatches.
    pub fn exact(name: impl Into<String>, failures: usize, total: usize) -> Check {
        Check {
            name: name.into(),
            passed: failures == 0,
            value: failures as f64,
            tolerance: 0.0,
            detail: format!("{failures} mismatches in {total} cases"),
        }
    }

    /// Residual compared against a tolerance; NaN fails.
    pub fn within(name: impl Into<String>, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            passed: residual <= tolerance,
            value: residual,
            tolerance,
            detail: format!("residual {residual:.3e} (tol {tolerance:.1e})"),
        }
    }

    /// A predicate with free-form detail.
    pub fn flag(name: impl Into<String>, passed: bool, value: f64, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            value,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Check {
        self.tolerance = tolerance;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}
