//! Report rows, JSON/CSV rendering and atomic file output.

use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// A value stated in closed form by the theory.
    Paper,
    /// A value obtained by an independent computation (quadrature, series, identity).
    Derived,
    /// A value that follows by inspection.
    Trivial,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Paper => "paper",
            Provenance::Derived => "derived",
            Provenance::Trivial => "trivial",
        }
    }
}

/// How a row is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// `|computed - target| ≤ tol · max(1, |target|)`.
    Close { target: f64, tol: f64 },
    /// `computed ≥ bound - tol`.
    AtLeast { bound: f64, tol: f64 },
    /// `computed ≤ bound`.
    AtMost { bound: f64 },
    /// Informational; passes when finite.
    Info,
    /// Not run for this configuration.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub computed: f64,
    pub check: Check,
    pub provenance: Provenance,
}

impl Row {
    pub fn new(name: impl Into<String>, computed: f64, check: Check, provenance: Provenance) -> Self {
        Self { name: name.into(), computed, check, provenance }
    }

    pub fn info(name: impl Into<String>, computed: f64) -> Self {
        Self::new(name, computed, Check::Info, Provenance::Derived)
    }

    pub fn skipped(name: impl Into<String>) -> Self {
        Self::new(name, f64::NAN, Check::Skipped, Provenance::Trivial)
    }

    pub fn pass(&self) -> bool {
        let c = self.computed;
        match self.check {
            Check::Close { target, tol } => (c - target).abs() <= tol * target.abs().max(1.0),
            Check::AtLeast { bound, tol } => c >= bound - tol,
            Check::AtMost { bound } => c <= bound,
            Check::Info => c.is_finite(),
            Check::Skipped => true,
        }
    }

    fn status(&self) -> &'static str {
        match (self.check, self.pass()) {
            (Check::Skipped, _) => "skipped",
            (_, true) => "pass",
            (_, false) => "fail",
        }
    }

    fn target_and_tol(&self) -> (Option<f64>, Option<f64>) {
        match self.check {
            Check::Close { target, tol } => (Some(target), Some(tol)),
            Check::AtLeast { bound, tol } => (Some(bound), Some(tol)),
            Check::AtMost { bound } => (Some(bound), None),
            Check::Info | Check::Skipped => (None, None),
        }
    }

    fn relation(&self) -> &'static str {
        match self.check {
            Check::Close { .. } => "close",
            Check::AtLeast { .. } => "at_least",
            Check::AtMost { .. } => "at_most",
            Check::Info => "info",
            Check::Skipped => "skipped",
        }
    }

    fn to_json(&self) -> Value {
        let (target, tol) = self.target_and_tol();
        json!({
            "name": self.name,
            "computed": num(self.computed),
            "target": target.map(num),
            "tolerance": tol.map(num),
            "relation": self.relation(),
            "status": self.status(),
            "provenance": self.provenance.as_str(),
        })
    }
}

/// JSON numbers cannot hold non-finite values; those become strings.
pub fn num(x: f64) -> Value {
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

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.17e}")
    } else {
        num(x).as_str().unwrap_or_default().to_string()
    }
}

/// A CSV table written next to the report.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Leading integer columns followed by numeric ones.
    pub fn push_mixed(&mut self, ints: &[usize], values: &[f64]) {
        let mut row: Vec<String> = ints.iter().map(|i| i.to_string()).collect();
        row.extend(values.iter().map(|v| fmt_num(*v)));
        self.rows.push(row);
    }

    pub fn push(&mut self, values: Vec<String>) {
        self.rows.push(values);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
    pub timings: Vec<(String, f64)>,
}

impl Report {
    pub fn new(command: &str, config: Map<String, Value>) -> Self {
        Self { command: command.to_string(), config, rows: Vec::new(), tables: Vec::new(), timings: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(Row::pass)
    }

    fn table_path(base: &Path, name: &str) -> PathBuf {
        let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        base.with_file_name(format!("{stem}.{name}.csv"))
    }

    pub fn to_json(&self, output: Option<&Path>, with_timings: bool) -> String {
        let tables: Map<String, Value> = self
            .tables
            .iter()
            .map(|t| {
                let v = match output {
                    Some(p) => json!(Self::table_path(p, &t.name).display().to_string()),
                    None => json!({ "header": t.header, "rows": t.rows }),
                };
                (t.name.clone(), v)
            })
            .collect();
        let mut doc = json!({
            "command": self.command,
            "config": Value::Object(self.config.clone()),
            "pass": self.all_pass(),
            "rows": self.rows.iter().map(Row::to_json).collect::<Vec<_>>(),
            "tables": tables,
        });
        if with_timings {
            let t: Map<String, Value> = self.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            doc["timings_seconds"] = Value::Object(t);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut t = Table::new("rows", &["name", "computed", "target", "tolerance", "relation", "status", "provenance"]);
        for r in &self.rows {
            let (target, tol) = r.target_and_tol();
            t.push(vec![
                r.name.clone(),
                fmt_num(r.computed),
                target.map(fmt_num).unwrap_or_default(),
                tol.map(fmt_num).unwrap_or_default(),
                r.relation().to_string(),
                r.status().to_string(),
                r.provenance.as_str().to_string(),
            ]);
        }
        t.to_csv()
    }

    /// Write the report (and its tables) to `output`, or print to stdout.
    pub fn emit(&self, output: Option<&Path>, csv: bool, with_timings: bool) -> std::io::Result<()> {
        let body = if csv { self.to_csv() } else { self.to_json(output, with_timings) };
        match output {
            None => {
                let mut out = body;
                if csv {
                    for t in &self.tables {
                        out.push_str(&format!("\n# {}\n{}", t.name, t.to_csv()));
                    }
                }
                match std::io::stdout().lock().write_all(out.as_bytes()) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => r,
                }
            }
            Some(path) => {
                write_atomic(path, &body)?;
                for t in &self.tables {
                    write_atomic(&Self::table_path(path, &t.name), &t.to_csv())?;
                }
                Ok(())
            }
        }
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_checks() {
        assert!(Row::new("a", 4.0 + 1e-9, Check::Close { target: 4.0, tol: 1e-8 }, Provenance::Paper).pass());
        assert!(!Row::new("a", 4.1, Check::Close { target: 4.0, tol: 1e-8 }, Provenance::Paper).pass());
        assert!(Row::new("b", 1.9999999, Check::AtLeast { bound: 2.0, tol: 1e-6 }, Provenance::Paper).pass());
        assert!(!Row::info("c", f64::INFINITY).pass());
        assert!(Row::skipped("d").pass());
    }

    #[test]
    fn json_keys_are_sorted_and_non_finite_values_are_strings() {
        let mut r = Report::new("x", Map::new());
        r.rows.push(Row::info("inf", f64::INFINITY));
        let s = r.to_json(None, false);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["rows"][0]["computed"], json!("inf"));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
