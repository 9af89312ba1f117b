//! Experiment reports: flat named statistics, threshold verdicts, and the
//! JSON/CSV artifacts. Key order is fixed by declaration and every map is
//! ordered, so identical runs serialize byte-identically.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::experiments::StudySpec;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Cell {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub enum Comparison {
    #[serde(rename = "lt")]
    LessThan,
    #[serde(rename = "gt")]
    GreaterThan,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub statistic: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn less(name: &str, statistic: f64, threshold: f64) -> Self {
        Verdict {
            name: name.to_string(),
            statistic,
            comparison: Comparison::LessThan,
            threshold,
            pass: statistic < threshold,
        }
    }

    pub fn greater(name: &str, statistic: f64, threshold: f64) -> Self {
        Verdict {
            name: name.to_string(),
            statistic,
            comparison: Comparison::GreaterThan,
            threshold,
            pass: statistic > threshold,
        }
    }
}

/// A raw per-sample table written as its own CSV artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub spec: StudySpec,
    /// Canonical resolved configuration text.
    pub config_echo: String,
    /// Git-blob style content hash of the resolved configuration.
    pub config_blob_sha256: String,
    pub cells: Vec<Cell>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub raw: Vec<RawTable>,
}

impl ExperimentReport {
    pub fn new(spec: StudySpec, config_echo: String) -> Self {
        let hash = crate::config::blob_hash(&config_echo);
        ExperimentReport {
            spec,
            config_echo,
            config_blob_sha256: hash,
            cells: Vec::new(),
            verdicts: Vec::new(),
            passed: true,
            raw: Vec::new(),
        }
    }

    pub fn cell(&mut self, name: impl Into<String>, value: f64) {
        self.cells.push(Cell { name: name.into(), value });
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.passed &= v.pass;
        self.verdicts.push(v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Summary CSV: one header row, then `cell,value` rows followed by the
    /// verdict lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,threshold,comparison,pass\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},,,\n", c.name, c.value));
        }
        for v in &self.verdicts {
            let cmp = match v.comparison {
                Comparison::LessThan => "lt",
                Comparison::GreaterThan => "gt",
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                v.name, v.statistic, v.threshold, cmp, v.pass
            ));
        }
        out
    }

    /// Write `report.json`, `report.csv`, and one CSV per raw table.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        for table in &self.raw {
            let mut f = std::fs::File::create(dir.join(format!("{}.csv", table.name)))?;
            writeln!(f, "{}", table.header.join(","))?;
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
                writeln!(f, "{}", line.join(","))?;
            }
        }
        Ok(())
    }

    /// One-line summary for the terminal.
    pub fn summary(&self) -> String {
        let passed = self.verdicts.iter().filter(|v| v.pass).count();
        format!(
            "{:?}: {}/{} checks passed -> {}",
            self.spec.kind,
            passed,
            self.verdicts.len(),
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}
