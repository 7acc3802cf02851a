//! Verification reports shared by every module.
//!
//! A report is a flat list of residual-vs-tolerance checks plus free-form
//! measurements that are recorded but not asserted. Serialization goes
//! through `serde_json::Value`, whose maps are ordered, so the JSON output is
//! key-sorted and stable across runs.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        // NaN residuals fail.
        let passed = residual <= tolerance;
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Short topical anchor naming the relation under test.
    pub anchor: String,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    pub measurements: BTreeMap<String, f64>,
    pub provenance: Option<Provenance>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, anchor: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            checks: Vec::new(),
            warnings: Vec::new(),
            measurements: BTreeMap::new(),
            provenance: None,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let c = CheckResult::new(name, residual, tolerance);
        let ok = c.passed;
        self.checks.push(c);
        ok
    }

    /// Records a boolean condition as a residual of 0 (true) or 1 (false)
    /// against tolerance 0.
    pub fn push_flag(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn measure(&mut self, key: impl Into<String>, value: f64) {
        self.measurements.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Folds another report's checks in, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
        for w in other.warnings {
            self.warnings.push(format!("{prefix}: {w}"));
        }
        for (k, v) in other.measurements {
            self.measurements.insert(format!("{prefix}/{k}"), v);
        }
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("value is serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_all_residuals_within_tolerance() {
        let mut r = VerificationReport::new("x", "a");
        assert!(r.passed());
        r.push("ok", 1e-13, 1e-12);
        assert!(r.passed());
        r.push("bad", 1e-11, 1e-12);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = VerificationReport::new("x", "a");
        r.push("nan", f64::NAN, 1.0);
        assert!(!r.passed());
    }

    #[test]
    fn json_keys_are_sorted_and_stable() {
        let mut r = VerificationReport::new("x", "a");
        r.measure("zeta", 1.0);
        r.measure("alpha", 0.1);
        let a = r.to_json();
        assert_eq!(a, r.clone().to_json());
        let i_anchor = a.find("\"anchor\"").unwrap();
        let i_check = a.find("\"check\"").unwrap();
        let i_warn = a.find("\"warnings\"").unwrap();
        assert!(i_anchor < i_check && i_check < i_warn);
        assert!(a.find("\"alpha\"").unwrap() < a.find("\"zeta\"").unwrap());
        let back: VerificationReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
    }
}
