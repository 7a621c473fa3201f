use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "# ergo-csv v1";

#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub id: String,
    pub passed: bool,
    #[serde(flatten)]
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
}

/// Everything a run produced. `duration_ms` is the only field that varies
/// between identical invocations.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub command: Vec<String>,
    pub cases: Vec<Case>,
    pub summary: Summary,
    pub duration_ms: u64,
}

pub struct ReportBuilder {
    command: Vec<String>,
    cases: Vec<Case>,
    max_deviation: Option<f64>,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            cases: Vec::new(),
            max_deviation: None,
            started: Instant::now(),
        }
    }

    pub fn case(&mut self, id: impl Into<String>, passed: bool, detail: Value) {
        self.cases.push(Case {
            id: id.into(),
            passed,
            detail,
        });
    }

    pub fn deviation(&mut self, d: f64) {
        self.max_deviation = Some(self.max_deviation.map_or(d, |m| m.max(d)));
    }

    pub fn finish(self) -> ExperimentReport {
        let passed = self.cases.iter().filter(|c| c.passed).count();
        ExperimentReport {
            command: self.command,
            summary: Summary {
                cases: self.cases.len(),
                passed,
                failed: self.cases.len() - passed,
                max_deviation: self.max_deviation,
            },
            cases: self.cases,
            duration_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        write_file(path, &text)
    }

    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{}: {} cases, {} passed, {} failed",
            self.command.get(1).map(String::as_str).unwrap_or("ergo"),
            self.summary.cases,
            self.summary.passed,
            self.summary.failed
        );
        if let Some(d) = self.summary.max_deviation {
            line.push_str(&format!(", max deviation {d}"));
        }
        line
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// CSV text with the versioned header comment.
pub fn csv_text(kind: &str, columns: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8");
    Ok(format!("{CSV_HEADER} {kind}\n{body}"))
}
