//! Report entries and the per-level verification report.

use serde::Serialize;
use serde_json::{json, Value};

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Precondition failed or data insufficient; not counted as a failure
    /// but reported.
    Skipped,
}

/// One named check with its residual, normalization scale, tolerance and
/// verdict. For two-sided checks the verdict is `|residual| ≤ tolerance ·
/// scale`; one-sided checks (Brakke) pass when `residual ≤ tolerance ·
/// scale`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub meta: Value,
}

impl ReportEntry {
    pub fn two_sided(name: &str, residual: f64, scale: f64, tolerance: f64, meta: Value) -> Self {
        let verdict = if residual.is_finite() && residual.abs() <= tolerance * scale {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ReportEntry {
            name: name.into(),
            residual,
            scale,
            tolerance,
            verdict,
            meta,
        }
    }

    pub fn one_sided(name: &str, residual: f64, scale: f64, tolerance: f64, meta: Value) -> Self {
        let verdict = if residual.is_finite() && residual <= tolerance * scale {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        ReportEntry {
            name: name.into(),
            residual,
            scale,
            tolerance,
            verdict,
            meta,
        }
    }

    pub fn with_verdict(
        name: &str,
        residual: f64,
        scale: f64,
        tolerance: f64,
        pass: bool,
        meta: Value,
    ) -> Self {
        ReportEntry {
            name: name.into(),
            residual,
            scale,
            tolerance,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            meta,
        }
    }

    pub fn skipped(name: &str, reason: &str) -> Self {
        ReportEntry {
            name: name.into(),
            residual: 0.0,
            scale: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Skipped,
            meta: json!({ "reason": reason }),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// All checks of one level plus the aggregate verdict string.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub level: f64,
    pub checks: Vec<ReportEntry>,
    pub verdict: String,
}

impl VerificationReport {
    pub fn is_variational(&self) -> bool {
        self.verdict == "variational"
    }

    pub fn entry(&self, name: &str) -> Option<&ReportEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// JSON value for a possibly non-finite float (JSON numbers must be finite).
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// CSV summary: one row per (level, check).
pub fn report_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("level,check,residual,scale,tolerance,verdict\n");
    for report in reports {
        for c in &report.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{:?}\n",
                report.level, c.name, c.residual, c.scale, c.tolerance, c.verdict
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let e = ReportEntry::two_sided("x", 0.03, 1.0, 0.05, json!({}));
        assert!(e.passed());
        let e = ReportEntry::two_sided("x", -0.06, 1.0, 0.05, json!({}));
        assert!(!e.passed());
        // One-sided: strongly negative residuals pass.
        let e = ReportEntry::one_sided("brakke", -10.0, 1.0, 0.05, json!({}));
        assert!(e.passed());
        let e = ReportEntry::one_sided("brakke", 0.06, 1.0, 0.05, json!({}));
        assert!(!e.passed());
    }

    #[test]
    fn csv_has_row_per_check() {
        let report = VerificationReport {
            level: 0.5,
            checks: vec![
                ReportEntry::two_sided("a", 0.0, 1.0, 0.05, json!({})),
                ReportEntry::skipped("b", "why"),
            ],
            verdict: "variational".into(),
        };
        let csv = report_csv(&[report]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("0.5,a,"));
        assert!(csv.contains("Skipped"));
    }

    #[test]
    fn json_sanitizes_non_finite() {
        assert_eq!(json_f64(f64::INFINITY), json!("inf"));
        assert_eq!(json_f64(1.5), json!(1.5));
    }
}
