//! Output formatting: numbers, CSV tables, verification reports, atomic writes.

use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Scientific notation with 17 significant digits, enough to round-trip an f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn as_string<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_num(*x))
}

/// CSV with a header line and one row per entry of `rows`.
pub fn table_csv(headers: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Which identity the check exercises.
    pub anchor: String,
    #[serde(serialize_with = "as_string")]
    pub max_residual: f64,
    #[serde(serialize_with = "as_string")]
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, anchor: &str, max_residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            max_residual,
            tolerance,
            pass: max_residual.is_finite() && max_residual <= tolerance,
        }
    }

    /// A check for a predicate with no residual attached (0 on success, 1 otherwise).
    pub fn flag(name: &str, anchor: &str, ok: bool) -> Self {
        Check::new(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config_echo: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub overall_pass: bool,
    /// Findings that are reported rather than asserted.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: &str, config_echo: BTreeMap<String, String>) -> Self {
        SuiteReport {
            suite: suite.into(),
            config_echo,
            checks: Vec::new(),
            overall_pass: true,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.overall_pass &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: SuiteReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,name,anchor,max_residual,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.suite,
                c.name,
                c.anchor,
                fmt_num(c.max_residual),
                fmt_num(c.tolerance),
                c.pass
            ));
        }
        out
    }
}

/// Write through a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
