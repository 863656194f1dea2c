//! Report directories: `report.json`, `evidence.csv`, `plots/*.svg`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Rows of a CSV file, all cells pre-rendered.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Everything a subcommand produces besides its exit code.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub report: serde_json::Value,
    pub evidence: Table,
    pub plots: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new<T: Serialize>(report: &T) -> Result<Self> {
        Ok(Artifacts { report: serde_json::to_value(report)?, ..Artifacts::default() })
    }
}

pub fn write_dir(dir: &Path, a: &Artifacts) -> Result<()> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).with_context(|| format!("creating {}", plots.display()))?;
    let mut json = serde_json::to_string_pretty(&a.report)?;
    json.push('\n');
    write(&dir.join("report.json"), json.as_bytes())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&a.evidence.header)?;
    for r in &a.evidence.rows {
        w.write_record(r)?;
    }
    write(&dir.join("evidence.csv"), &w.into_inner()?)?;
    for (name, svg) in &a.plots {
        write(&plots.join(format!("{name}.svg")), svg.as_bytes())?;
    }
    Ok(())
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Shortest round-trip rendering, so reruns are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v}")
}
