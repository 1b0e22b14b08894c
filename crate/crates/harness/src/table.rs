//! Result tables and their CSV + JSON sidecar serialization.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits, enough to round-trip any `f64`.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: String,
    /// File stem, e.g. `dynamics_aggregate`.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(experiment: &str, name: &str, columns: &[&'static str]) -> Self {
        ResultTable {
            experiment: experiment.to_string(),
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Value of numeric column `name` in every row.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::Int(v) => *v as f64,
                Cell::Float(v) => *v,
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }

    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row
                .iter()
                .any(|c| matches!(c, Cell::Float(x) if !x.is_finite()))
            {
                return Err(HarnessError::Config(format!(
                    "table {} row {i} contains a non-finite value",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        self.check_finite()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |source| HarnessError::Csv {
            path: PathBuf::from(&self.name),
            source,
        };
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| err(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub experiment: &'a str,
    pub table: &'a str,
    pub columns: &'a [&'static str],
    pub n_rows: usize,
    pub master_seed: u64,
    pub threads: usize,
    pub version: String,
    pub wall_time_s: f64,
    pub config: &'a serde_json::Value,
}

pub fn version_string() -> String {
    format!("deepmix {}", env!("CARGO_PKG_VERSION"))
}

/// Writes `<dir>/<name>.csv` and the metadata sidecar `<dir>/<name>.json`.
pub fn write_csv(table: &ResultTable, dir: &Path, sidecar: &Sidecar<'_>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(format!("{}.csv", table.name));
    fs::write(&path, table.to_csv_string()?).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    let meta_path = dir.join(format!("{}.json", table.name));
    let meta = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    fs::write(&meta_path, meta).map_err(|source| HarnessError::Io {
        path: meta_path,
        source,
    })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.5e-300,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new("fig1b", "fig1b", &["s2", "k", "delta_k"]);
        assert_eq!(t.to_csv_string().unwrap(), "s2,k,delta_k\n");
    }

    #[test]
    fn non_finite_rejected() {
        let mut t = ResultTable::new("fig1b", "fig1b", &["s2", "k", "delta_k"]);
        t.push(vec![Cell::Float(f64::NAN), 2usize.into(), 0.5.into()]);
        assert!(t.to_csv_string().is_err());
    }
}
