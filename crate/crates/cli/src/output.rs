//! CSV and JSON writers. Floats are printed with 17 significant digits so
//! they read back exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

use realpath::engine::PathDistribution;
use realpath::screen::DetectionRatio;

use crate::failure::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table: header plus rows of already formatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `# key=value` lines before the header, also top-level JSON fields.
    pub meta: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// A number kept as written in the config.
    Raw(serde_json::Number),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => num(*x),
            Cell::Text(s) => s.clone(),
            Cell::Raw(n) => n.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Raw(n) => Value::Number(n.clone()),
        }
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), meta: Vec::new() }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.meta {
                    writeln!(out, "# {k}={}", num(*v)).unwrap();
                }
                writeln!(out, "{}", self.header.join(",")).unwrap();
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", cells.join(",")).unwrap();
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.header.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
                    .collect();
                let mut doc = serde_json::Map::new();
                for (k, v) in &self.meta {
                    doc.insert(k.clone(), json!(v));
                }
                doc.insert("rows".into(), Value::Array(rows));
                let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
                text.push('\n');
                text
            }
        }
    }
}

pub fn distribution_table(d: &PathDistribution) -> Table {
    let mut t = Table::new(&["index", "prob", "smeared_re", "smeared_im", "denom"]);
    t.meta.push(("norm_constant".into(), d.norm_constant));
    for i in 0..d.len() {
        t.rows.push(vec![
            Cell::Int(i as i64 + 1),
            Cell::Float(d.probs[i]),
            Cell::Float(d.smeared[i].re),
            Cell::Float(d.smeared[i].im),
            Cell::Float(d.denom[i]),
        ]);
    }
    t
}

pub fn ratio_table(ratios: &[DetectionRatio]) -> Table {
    let mut t = Table::new(&["j", "k", "direct_ratio", "quantum_ratio", "rel_err"]);
    for r in ratios {
        t.rows.push(vec![
            Cell::Int(r.j as i64),
            Cell::Int(r.k as i64),
            Cell::Float(r.direct),
            Cell::Float(r.quantum),
            Cell::Float(r.rel_err),
        ]);
    }
    t
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
