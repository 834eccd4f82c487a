//! Run reports with a versioned schema and deterministic bytes: stable
//! field order, exact values rendered as strings, and no wall-clock data
//! unless explicitly requested.

use serde::Serialize;
use std::collections::BTreeMap;
use twistg_core::check::CheckReport;

/// Bump on any change to the serialized shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tables: BTreeMap<String, Table>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

#[derive(Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        push_csv_line(&mut out, &self.columns);
        for row in &self.rows {
            push_csv_line(&mut out, row);
        }
        out
    }
}

fn push_csv_line(out: &mut String, cells: &[String]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if cell.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&cell.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(cell);
        }
    }
    out.push('\n');
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            notes: Vec::new(),
            checks: Vec::new(),
            tables: BTreeMap::new(),
            summary: Summary { passed: 0, failed: 0 },
            timing_ms: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, details: impl Into<String>) {
        self.checks.push(CheckEntry {
            name: name.into(),
            passed,
            details: details.into(),
        });
    }

    /// Folds a library check report into this one.
    pub fn absorb(&mut self, report: CheckReport) {
        for c in report.checks {
            self.checks.push(CheckEntry {
                name: c.name,
                passed: c.passed,
                details: c.details,
            });
        }
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    /// Seals the summary; call once after all checks are recorded.
    pub fn finish(&mut self) {
        self.summary.passed = self.checks.iter().filter(|c| c.passed).count();
        self.summary.failed = self.checks.len() - self.summary.passed;
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV body: the lone table when there is exactly one, otherwise the
    /// checks themselves as rows.
    pub fn to_csv(&self) -> String {
        if self.tables.len() == 1 {
            return self.tables.values().next().unwrap().to_csv();
        }
        let mut t = Table::new(&["check", "passed", "details"]);
        for c in &self.checks {
            t.push(vec![c.name.clone(), c.passed.to_string(), c.details.clone()]);
        }
        t.to_csv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_cells_with_separators() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["plain".into(), "1".into()]);
        t.push(vec!["with, comma".into(), "say \"hi\"".into()]);
        assert_eq!(
            t.to_csv(),
            "name,value\nplain,1\n\"with, comma\",\"say \"\"hi\"\"\"\n"
        );
    }

    #[test]
    fn summary_counts_failures() {
        let mut r = Report::new("demo");
        r.check("a", true, "");
        r.check("b", false, "boom");
        r.finish();
        assert_eq!((r.summary.passed, r.summary.failed), (1, 1));
        assert!(!r.all_passed());
    }

    #[test]
    fn json_omits_empty_sections_and_timing() {
        let mut r = Report::new("demo");
        r.input("q", 2);
        r.check("a", true, "ok");
        r.finish();
        let s = r.to_json();
        assert!(!s.contains("timing_ms"));
        assert!(!s.contains("tables"));
        assert!(!s.contains("notes"));
        assert!(s.contains("\"schema_version\": 1"));
    }
}
