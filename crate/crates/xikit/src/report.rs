//! Check results, `report.txt`, and CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `measured <= tolerance`.
    AtMost,
    /// Passes when `measured >= tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), measured, tolerance, bound: Bound::AtMost }
    }

    pub fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), measured, tolerance, bound: Bound::AtLeast }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.measured <= self.tolerance,
            Bound::AtLeast => self.measured >= self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let op = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<24} {:>13.6e} {op} {:<13.6e} {verdict}", c.name, c.measured, c.tolerance);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        std::fs::write(path, self.render()).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
    }
}

/// A numeric table written with shortest round-trip scientific notation.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let wrap = |source| RunError::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(wrap)?;
        }
        w.flush().map_err(|source| RunError::Io { path: path.to_path_buf(), source })
    }
}
