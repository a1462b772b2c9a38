// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV tables with JSON sidecars, written atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// Fixed 12-significant-digit scientific notation; `nan`, `inf`, `-inf`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 {
        // Drop the sign of negative zero.
        format!("{:.11e}", 0.0)
    } else {
        format!("{v:.11e}")
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Float(v) => format_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Bool(b) => u8::from(*b).to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

/// One CSV file and the metadata that goes into its sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// Quantity label recorded in the sidecar.
    pub quantity: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub boundary: Option<String>,
    /// Parameter points the rows were computed at.
    pub params: Vec<Value>,
    /// Row count per method flag.
    pub methods: BTreeMap<String, usize>,
    /// Quantity-specific sidecar entries.
    pub extra: BTreeMap<String, Value>,
}

impl Table {
    pub fn new(name: impl Into<String>, quantity: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            quantity: quantity.into(),
            columns,
            rows: Vec::new(),
            boundary: None,
            params: Vec::new(),
            methods: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn count_method(&mut self, method: impl Into<String>, n: usize) {
        *self.methods.entry(method.into()).or_default() += n;
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Io {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.columns).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| CliError::Io {
            path: PathBuf::from(format!("{}.csv", self.name)),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

pub fn sidecar(table: &Table, tolerances: &Value) -> Value {
    let mut v = json!({
        "file": format!("{}.csv", table.name),
        "quantity": table.quantity,
        "version": env!("CARGO_PKG_VERSION"),
        "columns": table.columns,
        "rows": table.rows.len(),
        "boundary": table.boundary,
        "params": table.params,
        "tolerances": tolerances,
        "methods": table.methods,
    });
    if let Value::Object(map) = &mut v {
        for (k, e) in &table.extra {
            map.insert(k.clone(), e.clone());
        }
    }
    v
}

fn write_atomic(dir: &Path, file: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(file);
    let io = |source: std::io::Error| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

/// Creates `dir` if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes each table as `<name>.csv` plus `<name>.json`; returns the paths.
pub fn write_tables(dir: &Path, tables: &[Table], tolerances: &Value) -> Result<Vec<PathBuf>> {
    // Render everything before touching the file system.
    let mut rendered = Vec::with_capacity(tables.len());
    for t in tables {
        let csv = t.to_csv()?;
        let mut json = serde_json::to_vec_pretty(&sidecar(t, tolerances)).expect("sidecar serializes");
        json.push(b'\n');
        rendered.push((t.name.clone(), csv, json));
    }
    ensure_dir(dir)?;
    let mut paths = Vec::new();
    for (name, csv, json) in rendered {
        paths.push(write_atomic(dir, &format!("{name}.csv"), &csv)?);
        paths.push(write_atomic(dir, &format!("{name}.json"), &json)?);
    }
    Ok(paths)
}

/// Writes a standalone JSON document atomically.
pub fn write_json(dir: &Path, file: &str, value: &Value) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let mut bytes = serde_json::to_vec_pretty(value).expect("json serializes");
    bytes.push(b'\n');
    write_atomic(dir, file, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed() {
        assert_eq!(format_float(0.3), "3.00000000000e-1");
        assert_eq!(format_float(-0.0), "0.00000000000e0");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(Cell::Bool(true).render(), "1");
    }

    #[test]
    fn writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", "loss_profile", vec!["x", "P_x", "method"]);
        t.push(vec![1usize.into(), 0.25.into(), "TIME_STEPPING".into()]);
        t.count_method("TIME_STEPPING", 1);
        t.boundary = Some("obc".into());
        t.params = vec![json!({"t1": 0.3})];
        let paths = write_tables(dir.path(), &[t], &json!({"residual_tol": 1e-8})).unwrap();
        assert_eq!(paths.len(), 2);
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(csv, "x,P_x,method\n1,2.50000000000e-1,TIME_STEPPING\n");
        let side: Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(side["file"], "demo.csv");
        assert_eq!(side["methods"]["TIME_STEPPING"], 1);
        assert_eq!(side["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(side["boundary"], "obc");
        assert_eq!(side["params"][0]["t1"], 0.3);
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 2);
    }
}
