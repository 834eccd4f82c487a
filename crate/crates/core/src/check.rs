//! Uniform pass/fail records for verification routines, serializable for
//! report output.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool, details: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            passed,
            details: details.into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn new() -> CheckReport {
        CheckReport::default()
    }

    pub fn record(&mut self, name: impl Into<String>, passed: bool, details: impl Into<String>) {
        self.checks.push(CheckResult::new(name, passed, details));
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn summary(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        format!("{}/{} checks passed", passed, self.checks.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_aggregates_outcomes() {
        let mut r = CheckReport::new();
        r.record("first", true, "ok");
        assert!(r.all_passed());
        r.record("second", false, "mismatch at (0,1)");
        assert!(!r.all_passed());
        assert_eq!(r.summary(), "1/2 checks passed");
        assert_eq!(r.failures().count(), 1);
    }
}
