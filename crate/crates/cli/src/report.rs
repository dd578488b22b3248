//! Run reports: one versioned JSON document per run plus plot-ready CSV
//! tables, written atomically so an interrupted run never leaves a
//! truncated file behind.
//!
//! Wall times appear only in the JSON; the CSV tables are pure functions of
//! the config and seed, so reruns produce byte-identical tables.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use wick_core::ReportRow;

use crate::error::CliError;
use crate::suites::TrajectoryRow;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One gate: a named scalar against its threshold, or a bare pass/fail
/// flag. `metric` is None for flags and for non-finite values, which JSON
/// cannot carry; the note says what happened instead.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRow {
    /// Residual-style gate: passes when metric ≤ threshold.
    pub fn at_most(check: impl Into<String>, metric: f64, threshold: f64) -> CheckRow {
        if !metric.is_finite() {
            return CheckRow {
                check: check.into(),
                status: Status::Fail,
                metric: None,
                threshold: Some(threshold),
                note: Some("metric was not finite".to_string()),
            };
        }
        CheckRow {
            check: check.into(),
            status: if metric <= threshold {
                Status::Pass
            } else {
                Status::Fail
            },
            metric: Some(metric),
            threshold: Some(threshold),
            note: None,
        }
    }

    /// Order-style gate: passes when a fitted rate reaches the floor; a
    /// degenerate fit (None) fails rather than passing silently.
    pub fn at_least(check: impl Into<String>, metric: Option<f64>, floor: f64) -> CheckRow {
        match metric {
            Some(m) if m.is_finite() => CheckRow {
                check: check.into(),
                status: if m >= floor {
                    Status::Pass
                } else {
                    Status::Fail
                },
                metric: Some(m),
                threshold: Some(floor),
                note: None,
            },
            _ => CheckRow {
                check: check.into(),
                status: Status::Fail,
                metric: None,
                threshold: Some(floor),
                note: Some("no usable rate fit".into()),
            },
        }
    }

    pub fn flag(check: impl Into<String>, ok: bool, note: impl Into<String>) -> CheckRow {
        CheckRow {
            check: check.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            metric: None,
            threshold: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckRow {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub wall_ms: u64,
    /// Coefficients dropped by the policy while this suite ran; always 0
    /// under strict overflow, which errors instead of dropping.
    pub truncations: u64,
    pub checks: Vec<CheckRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub subcommand: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub truncations: u64,
    pub wall_ms_total: u64,
    pub suites: Vec<SuiteReport>,
}

impl RunReport {
    pub fn new(
        subcommand: &'static str,
        config_hash: String,
        seed: u64,
        suites: Vec<SuiteReport>,
        total: Duration,
    ) -> RunReport {
        let passed = suites
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| c.status == Status::Pass)
            .count();
        let failed = suites
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| c.status == Status::Fail)
            .count();
        let truncations = suites.iter().map(|s| s.truncations).sum();
        RunReport {
            schema_version: SCHEMA_VERSION,
            subcommand,
            config_hash,
            seed,
            passed,
            failed,
            truncations,
            wall_ms_total: total.as_millis() as u64,
            suites,
        }
    }

    pub fn any_failed(&self) -> bool {
        self.failed > 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check across all suites.
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("config_hash,suite,check,status,metric,threshold\n");
        for suite in &self.suites {
            for c in &suite.checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                };
                let metric = c.metric.map(|v| format!("{v:.16e}")).unwrap_or_default();
                let threshold = c.threshold.map(|v| format!("{v:.3e}")).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    self.config_hash, suite.name, c.check, status, metric, threshold
                ));
            }
        }
        out
    }
}

/// Convergence rows grouped by study, keyed by the config hash.
pub fn study_csv(config_hash: &str, rows: &[(&'static str, ReportRow)]) -> String {
    let mut out = String::from("config_hash,study,k,z_id,abs_error,fitted_rate\n");
    for (study, row) in rows {
        out.push_str(&format!("{config_hash},{study},{}\n", row.csv_line()));
    }
    out
}

/// Pairing trajectories t ↦ ⟨Y(t), z⟩ for each series and probe.
pub fn trajectory_csv(config_hash: &str, rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("config_hash,series,t_index,t,z_id,value\n");
    for r in rows {
        out.push_str(&format!(
            "{config_hash},{},{},{:.16e},{},{:.16e}\n",
            r.series, r.t_index, r.t, r.z_id, r.value
        ));
    }
    out
}

/// Write-then-rename within the target directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        context: format!("creating {}", dir.display()),
        source: e,
    })?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("report");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| CliError::Io {
        context: format!("writing {}", tmp.display()),
        source: e,
    })?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io {
        context: format!("renaming into {}", path.display()),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_compare_in_the_right_direction() {
        assert_eq!(CheckRow::at_most("r", 1e-13, 1e-12).status, Status::Pass);
        assert_eq!(CheckRow::at_most("r", 2e-12, 1e-12).status, Status::Fail);
        assert_eq!(
            CheckRow::at_least("o", Some(1.95), 1.9).status,
            Status::Pass
        );
        assert_eq!(CheckRow::at_least("o", Some(1.2), 1.9).status, Status::Fail);
        assert_eq!(CheckRow::at_least("o", None, 1.9).status, Status::Fail);
    }

    #[test]
    fn non_finite_metrics_fail_and_stay_out_of_json() {
        let row = CheckRow::at_most("r", f64::NAN, 1e-12);
        assert_eq!(row.status, Status::Fail);
        assert!(row.metric.is_none());
        let text = serde_json::to_string(&row).unwrap();
        assert!(!text.contains("NaN"), "{text}");
    }

    #[test]
    fn csv_places_empty_cells_for_flags() {
        let suites = vec![SuiteReport {
            name: "demo".into(),
            wall_ms: 3,
            truncations: 0,
            checks: vec![
                CheckRow::at_most("gap", 0.25, 1.0),
                CheckRow::flag("hypotheses", true, "verified"),
            ],
        }];
        let report = RunReport::new("verify", "abc".into(), 7, suites, Duration::from_millis(3));
        let csv = report.checks_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "config_hash,suite,check,status,metric,threshold");
        assert_eq!(lines[1], "abc,demo,gap,pass,2.5000000000000000e-1,1.000e0");
        assert_eq!(lines[2], "abc,demo,hypotheses,pass,,");
        assert_eq!(report.passed, 2);
        assert_eq!(report.failed, 0);
    }
}
