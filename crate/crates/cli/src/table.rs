//! Tabular output: CSV, or a JSON envelope `{meta, rows}` carrying the same
//! numbers. Floats use the shortest representation that round-trips.

use std::fmt::Write as _;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(*x),
            Cell::Num(x) => Value::String(format_float(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest round-trip decimal; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        // Display and LowerExp both give the shortest string that parses back exactly.
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra context for the JSON envelope.
    pub meta: Map<String, Value>,
    /// Diagnostics printed to stderr.
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new(), meta: Map::new(), warnings: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self, command: &str) -> String {
        let mut meta = self.meta.clone();
        meta.insert("command".into(), Value::String(command.into()));
        meta.insert("columns".into(), self.header.iter().map(|h| Value::String((*h).into())).collect());
        if !self.warnings.is_empty() {
            meta.insert("warnings".into(), self.warnings.iter().map(|w| Value::String(w.clone())).collect());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(r) {
                    m.insert((*h).into(), c.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut env = Map::new();
        env.insert("meta".into(), Value::Object(meta));
        env.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(env)).expect("JSON values serialise");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["x", "n", "tag"]);
        t.push(vec![Cell::from(0.1 + 0.2), Cell::from(3usize), Cell::from("a,b")]);
        let csv = t.to_csv();
        assert_eq!(csv, "x,n,tag\n0.30000000000000004,3,\"a,b\"\n");
        let v: Value = serde_json::from_str(&t.to_json("test")).unwrap();
        assert_eq!(v["rows"][0]["x"].as_f64().unwrap(), 0.1 + 0.2);
        assert_eq!(v["meta"]["command"], "test");
    }

    #[test]
    fn float_formatting_round_trips() {
        for x in [std::f64::consts::PI * std::f64::consts::PI, 1e-300, -2.5e17, 4.0, -3.8e-16] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(-3.8e-16), "-3.8e-16");
    }
}
