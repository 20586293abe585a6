//! Tabular results and their CSV / JSON encodings.

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::Failure;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub config: RunConfig,
    pub table: Table,
    pub diagnostics: Vec<String>,
}

/// On-disk JSON layout.
#[derive(Serialize, Deserialize)]
struct JsonDoc {
    config: RunConfig,
    results: Vec<Map<String, Value>>,
    diagnostics: Vec<String>,
}

/// Twelve significant digits, fixed notation for moderate magnitudes.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

impl Output {
    pub fn to_csv(&self) -> Result<String, Failure> {
        let config = serde_json::to_string(&self.config).context("encoding config")?;
        let mut s = String::new();
        s.push_str(&format!("# secrecy-relay {}\n", env!("CARGO_PKG_VERSION")));
        s.push_str(&format!("# config: {config}\n"));
        s.push_str(&format!("# seed: {}\n", self.config.monte_carlo.seed));
        for d in &self.diagnostics {
            s.push_str(&format!("# diagnostic: {d}\n"));
        }
        s.push_str(&self.table.columns.join(","));
        s.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String, Failure> {
        let results = self
            .table
            .rows
            .iter()
            .map(|row| {
                self.table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, &v)| (c.clone(), serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)))
                    .collect()
            })
            .collect();
        let doc = JsonDoc {
            config: self.config.clone(),
            results,
            diagnostics: self.diagnostics.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).context("encoding results")?;
        s.push('\n');
        Ok(s)
    }
}
