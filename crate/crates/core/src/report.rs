//! Machine-readable run reports: per-check records with a PASS / FAIL /
//! SKIP status, plus JSON and CSV serialization. The JSON layout is
//! schema-versioned so downstream tooling can detect breaking changes.

use serde::Serialize;
use std::fmt;

/// Sentinel error magnitude for records whose check never produced a
/// measurement (runner errors and skipped checks). Chosen finite so the
/// JSON stays strictly numeric, and larger than any plausible tolerance
/// so the "PASS iff max_abs_err <= tolerance" rule still reads correctly.
pub const ERR_UNMEASURED: f64 = 9.0e99;

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

/// One verification record. `status` is `Pass` exactly when the measured
/// `max_abs_err` is at most `tolerance`; checks that error out are
/// recorded as `Fail` with the message appended to `params`, and `Skip`
/// is reserved for checks whose preconditions the configured budgets
/// cannot certify.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub paper_ref: String,
    pub status: Status,
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub params: String,
    pub runtime_ms: u64,
}

impl CheckResult {
    /// Record for a check that ran to completion and measured an error.
    pub fn measured(
        name: &str,
        paper_ref: &str,
        tolerance: f64,
        max_abs_err: f64,
        params: &str,
        runtime_ms: u64,
    ) -> Self {
        let status = if max_abs_err <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        CheckResult {
            name: name.to_owned(),
            paper_ref: paper_ref.to_owned(),
            status,
            max_abs_err,
            tolerance,
            params: params.to_owned(),
            runtime_ms,
        }
    }

    /// Record for a check that returned an error instead of a measurement.
    pub fn errored(
        name: &str,
        paper_ref: &str,
        tolerance: f64,
        params: &str,
        message: &str,
        runtime_ms: u64,
    ) -> Self {
        CheckResult {
            name: name.to_owned(),
            paper_ref: paper_ref.to_owned(),
            status: Status::Fail,
            max_abs_err: ERR_UNMEASURED,
            tolerance,
            params: format!("{params}; error: {message}"),
            runtime_ms,
        }
    }

    /// Record for a check whose budget preconditions were not met.
    pub fn skipped(name: &str, paper_ref: &str, tolerance: f64, reason: &str) -> Self {
        CheckResult {
            name: name.to_owned(),
            paper_ref: paper_ref.to_owned(),
            status: Status::Skip,
            max_abs_err: ERR_UNMEASURED,
            tolerance,
            params: format!("skipped: {reason}"),
            runtime_ms: 0,
        }
    }
}

/// A complete suite run. `schema` is bumped on any breaking change to
/// the record layout.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub timestamp: u64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    /// Assembles a report. The timestamp honors SOURCE_DATE_EPOCH so
    /// archived reports reproduce byte for byte; without it the field is
    /// pinned to zero rather than wall time, which keeps repeated runs
    /// directly comparable.
    pub fn new(suite: &str, seed: u64, checks: Vec<CheckResult>) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0);
        VerificationReport {
            schema: 1,
            suite: suite.to_owned(),
            seed,
            timestamp,
            checks,
        }
    }

    pub fn fail_count(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .count()
    }

    /// Exit-code rule: a run succeeds exactly when no record FAILed.
    /// Skipped checks do not fail the run; they are visible in the report.
    pub fn all_passed(&self) -> bool {
        self.fail_count() == 0
    }

    pub fn to_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(self).expect("report serialization is infallible");
        out.push('\n');
        out
    }

    /// Flat projection of the same records, one row per check.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("name,paper_ref,status,max_abs_err,tolerance,params,runtime_ms\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{},{}\n",
                csv_field(&c.name),
                csv_field(&c.paper_ref),
                c.status,
                c.max_abs_err,
                c.tolerance,
                csv_field(&c.params),
                c.runtime_ms
            ));
        }
        out
    }
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}
