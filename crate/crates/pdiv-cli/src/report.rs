//! The machine-readable check report. The JSON layout is versioned and
//! pinned by golden-file tests; bump `SCHEMA_VERSION` on any change.

use serde::Serialize;

use pdiv_core::divisibility::FeasibilityResult;
use pdiv_core::CheckReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub dim: usize,
    pub order: usize,
    pub checks: Vec<CheckJson>,
    pub all_passed: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<CheckReport> for CheckJson {
    fn from(r: CheckReport) -> Self {
        CheckJson {
            name: r.name,
            passed: r.passed,
            max_residual: r.max_residual,
            witness: r.witness,
            note: None,
        }
    }
}

impl CheckJson {
    pub fn from_feasibility(result: &FeasibilityResult) -> Self {
        let note = if !result.feasible {
            "no stochastic divisor exists"
        } else if result.multiple_witnesses() {
            "multiple witnesses (divisor not unique)"
        } else {
            "unique witness"
        };
        CheckJson {
            name: "p-divisibility".to_string(),
            passed: result.feasible,
            max_residual: result.residual,
            witness: None,
            note: Some(note.to_string()),
        }
    }
}

impl ReportJson {
    pub fn new(dim: usize, order: usize, checks: Vec<CheckJson>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        ReportJson {
            schema_version: SCHEMA_VERSION,
            dim,
            order,
            checks,
            all_passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:<6} {:<12} note\n",
            "check", "status", "max residual"
        ));
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            out.push_str(&format!(
                "{:<24} {:<6} {:<12.3e} {}\n",
                c.name,
                status,
                c.max_residual,
                c.note.as_deref().unwrap_or("")
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.all_passed { "pass" } else { "FAIL" }
        ));
        out
    }
}
