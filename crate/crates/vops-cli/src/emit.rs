//! Output assembly: metadata plus tabular rows, rendered as CSV or JSON and
//! written atomically.

use std::path::PathBuf;

use serde_json::{json, Map, Value};
use vops::{Error, Result};

/// Floats are emitted with 17 significant digits so parsing them back is
/// lossless.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt_f(*v),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => json!(v),
            Cell::I(v) => json!(v),
            Cell::U(v) => json!(v),
            Cell::B(v) => json!(v),
            Cell::S(v) => json!(v),
        }
    }
}

/// A metadata block plus named columns of rows; every command's output is one
/// of these (fit and scissors also offer richer standalone JSON).
pub struct Table {
    meta: Vec<(String, Cell)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta_f(&mut self, key: &str, v: f64) {
        self.meta.push((key.into(), Cell::F(v)));
    }

    pub fn meta_i(&mut self, key: &str, v: i64) {
        self.meta.push((key.into(), Cell::I(v)));
    }

    pub fn meta_u(&mut self, key: &str, v: u64) {
        self.meta.push((key.into(), Cell::U(v)));
    }

    pub fn meta_s(&mut self, key: &str, v: &str) {
        self.meta.push((key.into(), Cell::S(v.into())));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, v) in &self.meta {
            out.push_str(&format!("# {key}={}\n", v.csv()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut params = Map::new();
        for (key, v) in &self.meta {
            params.insert(key.clone(), v.json());
        }
        let rows: Vec<Value> =
            self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({
            "params": Value::Object(params),
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable document");
        text.push('\n');
        text
    }
}

/// Writes to stdout, or to a sibling temp file renamed over the target so a
/// partial write never replaces a previous result.
pub fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    let Some(path) = out else {
        print!("{content}");
        return Ok(());
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("output path {} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, content)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Domain(format!("cannot move output into {}: {e}", path.display())))?;
    Ok(())
}
