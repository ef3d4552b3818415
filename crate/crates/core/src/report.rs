use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Measured sides of an inequality together with the constant used.
///
/// `pass` is `lhs <= rhs` evaluated on the full-precision values; no
/// tolerance is applied to the inequality itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub margin: f64,
    pub pass: bool,
    pub params: BTreeMap<String, Value>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, constant_used: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            constant_used,
            margin: rhs - lhs,
            pass: lhs <= rhs,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Margin relative to the right-hand side; used to pick the tightest
    /// member of an ensemble.
    pub fn relative_margin(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs <= 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            self.margin / self.rhs.abs()
        }
    }
}

/// Folds an ensemble of reports into the tightest one, recording the
/// trial count and the number of violations.
pub fn tightest(name: &str, reports: impl IntoIterator<Item = InequalityReport>) -> InequalityReport {
    let mut worst: Option<InequalityReport> = None;
    let mut trials = 0u64;
    let mut violations = 0u64;
    for r in reports {
        trials += 1;
        if !r.pass {
            violations += 1;
        }
        let replace = match &worst {
            None => true,
            Some(w) => r.relative_margin() < w.relative_margin(),
        };
        if replace {
            worst = Some(r);
        }
    }
    let mut out = worst.unwrap_or_else(|| InequalityReport::new(name, 0.0, 0.0, 0.0));
    out.name = name.to_string();
    out.pass = violations == 0;
    out.set_param("trials", trials);
    out.set_param("violations", violations);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_lhs_le_rhs() {
        assert!(InequalityReport::new("a", 1.0, 1.0, 0.0).pass);
        assert!(!InequalityReport::new("a", 1.0 + 1e-15, 1.0, 0.0).pass);
        assert_eq!(InequalityReport::new("a", 0.25, 1.0, 0.0).margin, 0.75);
    }

    #[test]
    fn tightest_counts_violations() {
        let rs = vec![
            InequalityReport::new("x", 0.1, 1.0, 1.0),
            InequalityReport::new("x", 2.0, 1.0, 1.0),
            InequalityReport::new("x", 0.9, 1.0, 1.0),
        ];
        let t = tightest("ens", rs);
        assert!(!t.pass);
        assert_eq!(t.lhs, 2.0);
        assert_eq!(t.params["violations"], 1);
        assert_eq!(t.params["trials"], 3);
    }
}
