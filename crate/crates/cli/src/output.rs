use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::commands::{AccumulationCsvRow, AccumulationTable, BoundsReport, BudgetTable, SpectrumTable, VqdReport};

/// A CSV table preceded by `# config: <json>` and any extra comment lines.
fn csv_with_header<C: Serialize, R: Serialize>(config: &C, comments: &[String], rows: &[R]) -> Result<String> {
    let mut out = format!("# config: {}\n", serde_json::to_string(config)?);
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(out)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

impl VqdReport<'_> {
    pub fn render(&self) -> Result<String> {
        json(self)
    }
}

impl BoundsReport<'_> {
    pub fn render(&self) -> Result<String> {
        json(self)
    }
}

impl SpectrumTable<'_> {
    pub fn render(&self) -> Result<String> {
        let comments: Vec<String> = self
            .failures
            .iter()
            .map(|f| format!("failed: {}: {}", f.path.display(), f.error))
            .collect();
        csv_with_header(&self.config, &comments, &self.rows)
    }
}

impl BudgetTable<'_> {
    pub fn render(&self) -> Result<String> {
        csv_with_header(&self.config, &[], &self.rows)
    }
}

impl AccumulationTable<'_> {
    pub fn render(&self) -> Result<String> {
        let rows: Vec<AccumulationCsvRow> = self.rows.iter().map(AccumulationCsvRow::from).collect();
        csv_with_header(&self.config, &[], &rows)
    }
}

/// Writes to `out`, or to standard output when no path is given.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Reads the configuration line back from a CSV produced by this crate.
pub fn config_line(csv: &str) -> Option<&str> {
    csv.lines().next()?.strip_prefix("# config: ")
}
