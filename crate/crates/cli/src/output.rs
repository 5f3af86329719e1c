//! Table output: CSV with a seed comment line, a JSON mirror of the same
//! table, and the meta sidecar recording the resolved configuration.
//!
//! Floats are printed with 17 significant digits so every value round-trips
//! exactly and output files can be diffed byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub seed: u64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(seed: u64, columns: Vec<&'static str>) -> Self {
        Table {
            seed,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn float_repr(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_escape(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "# seed={}", table.seed).unwrap();
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let line: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => float_repr(*v),
                Cell::Text(v) => csv_escape(v),
            })
            .collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

pub fn render_json(table: &Table) -> String {
    let rows: Vec<Vec<serde_json::Value>> = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| match cell {
                    Cell::Int(v) => json!(v),
                    // the decimal string keeps the JSON mirror byte-stable
                    // and exactly as round-trippable as the CSV
                    Cell::Float(v) => json!(float_repr(*v)),
                    Cell::Text(v) => json!(v),
                })
                .collect()
        })
        .collect();
    let value = json!({
        "seed": table.seed,
        "columns": table.columns,
        "rows": rows,
    });
    serde_json::to_string_pretty(&value).unwrap()
}

/// Writes the table in the requested format and returns the path written.
pub fn write_table(table: &Table, out: &str, format: &str) -> io::Result<()> {
    let rendered = match format {
        "json" => render_json(table),
        _ => render_csv(table),
    };
    fs::write(out, rendered)
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a RunConfig,
    tool_version: &'static str,
    wall_time_secs: f64,
}

/// The `<out>.meta.json` sidecar: full resolved config, tool version, wall
/// time. Everything except the wall time is deterministic for a given
/// invocation.
pub fn write_meta(out: &str, config: &RunConfig, wall_time_secs: f64) -> io::Result<()> {
    let meta = Meta {
        config,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_time_secs,
    };
    let path = format!("{out}.meta.json");
    fs::write(Path::new(&path), serde_json::to_string_pretty(&meta).unwrap())
}
