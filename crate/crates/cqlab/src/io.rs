//! Versioned CSV and JSON artifacts.
//!
//! Every file starts with a header carrying the tool version, a hash of the
//! run configuration and the grid parameters: `#` comment lines in CSV, a
//! `header` object in JSON. Numbers in CSV are written with 17 significant
//! digits; JSON uses the shortest representation that round-trips.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

/// Header embedded in every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    /// Tool name.
    pub tool: String,
    /// Tool version.
    pub version: String,
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    /// Grid and step parameters.
    pub grid: GridInfo,
}

/// Discretization parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    /// Grid points (`None` = per-command default).
    pub grid_n: Option<usize>,
    /// Outer radius (`None` = per-command default).
    pub r_max: Option<f64>,
    /// Bisection tolerance.
    pub tol_b: f64,
    /// Evolution time step.
    pub dt: f64,
}

impl Header {
    /// Header for a configuration.
    pub fn for_config(config: &RunConfig) -> Self {
        Header {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            grid: GridInfo { grid_n: config.grid_n, r_max: config.r_max, tol_b: config.tol_b, dt: config.dt },
        }
    }
}

/// Full-precision decimal.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// One CSV/JSON cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// Number.
    Num(f64),
    /// Text.
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rectangular table with named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// Column names.
    pub columns: Vec<String>,
    /// Rows, each as long as `columns`.
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Empty table with these columns.
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row length");
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        let v = match v {
                            Cell::Num(x) => json!(x),
                            Cell::Text(s) => json!(s),
                        };
                        obj.insert(c.clone(), v);
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Writes artifacts into one directory in the selected formats.
#[derive(Clone, Debug)]
pub struct Output {
    /// Target directory.
    pub dir: PathBuf,
    /// Formats to write.
    pub formats: Vec<Format>,
    /// Header for every file.
    pub header: Header,
}

impl Output {
    /// Output for a configuration; creates the directory.
    pub fn new(config: &RunConfig) -> Result<Self> {
        let dir = config.out.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir, formats: config.formats.clone(), header: Header::for_config(config) })
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Write `name.csv` and/or `name.json` (rows as objects); returns the
    /// paths written.
    pub fn table(&self, name: &str, table: &Table) -> Result<Vec<PathBuf>> {
        self.table_with_json(name, table, &table.to_json())
    }

    /// Like [`Output::table`] with a different JSON document.
    pub fn table_with_json<T: Serialize>(&self, name: &str, table: &Table, json: &T) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if self.wants(Format::Csv) {
            let path = self.dir.join(format!("{name}.csv"));
            write_csv(&path, &self.header, table)?;
            written.push(path);
        }
        if self.wants(Format::Json) {
            let path = self.dir.join(format!("{name}.json"));
            write_json(&path, &self.header, &serde_json::to_value(json)?)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Write a record: JSON as is, CSV as flattened `key,value` rows.
    pub fn record<T: Serialize>(&self, name: &str, data: &T) -> Result<Vec<PathBuf>> {
        let value = serde_json::to_value(data)?;
        let mut written = Vec::new();
        if self.wants(Format::Csv) {
            let mut t = Table::new(&["key", "value"]);
            let mut flat = Vec::new();
            flatten("", &value, &mut flat);
            for (k, v) in flat {
                t.push(vec![Cell::Text(k), v]);
            }
            let path = self.dir.join(format!("{name}.csv"));
            write_csv(&path, &self.header, &t)?;
            written.push(path);
        }
        if self.wants(Format::Json) {
            let path = self.dir.join(format!("{name}.json"));
            write_json(&path, &self.header, &value)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Cell)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::Number(n) => out.push((prefix.to_string(), Cell::Num(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Null => out.push((prefix.to_string(), Cell::Text(String::new()))),
        Value::Bool(b) => out.push((prefix.to_string(), Cell::Text(b.to_string()))),
        Value::String(s) => out.push((prefix.to_string(), Cell::Text(s.clone()))),
    }
}

/// CSV with `#` header lines.
pub fn write_csv(path: &Path, header: &Header, table: &Table) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&format!("# {} {}\n", header.tool, header.version));
    buf.push_str(&format!("# config_hash: {}\n", header.config_hash));
    let r_max = header.grid.r_max.map_or("default".to_string(), number);
    let grid_n = header.grid.grid_n.map_or("default".to_string(), |n| n.to_string());
    buf.push_str(&format!(
        "# grid_n: {}, r_max: {}, tol_b: {}, dt: {}\n",
        grid_n,
        r_max,
        number(header.grid.tol_b),
        number(header.grid.dt)
    ));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Num(x) => number(*x),
            Cell::Text(s) => s.clone(),
        }))?;
    }
    buf.push_str(std::str::from_utf8(&w.into_inner()?)?);
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

/// JSON `{"header": …, "data": …}`.
pub fn write_json(path: &Path, header: &Header, data: &Value) -> Result<()> {
    let doc = json!({ "header": header, "data": data });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Read a CSV written by [`write_csv`] back into columns and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_seventeen_digits() {
        for x in [1.0 / 3.0, 189.68211174378317, -2.5e-300, 0.0] {
            let s = number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(f64::INFINITY), "inf");
    }

    #[test]
    fn flattening_records() {
        let mut out = Vec::new();
        flatten("", &json!({"a": {"b": 1.5, "c": [2.0, "x"]}, "d": true}), &mut out);
        let keys: Vec<&str> = out.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["a.b", "a.c.0", "a.c.1", "d"]);
    }
}
