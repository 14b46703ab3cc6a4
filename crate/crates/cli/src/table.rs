use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::schema;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Twelve significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => json!(s),
            Cell::Int(i) => json!(i),
            // Round-trip through the fixed text form so both formats agree.
            Cell::Float(v) if v.is_finite() => json!(fmt_float(*v).parse::<f64>().expect("formatted float")),
            Cell::Float(_) | Cell::Empty => Value::Null,
        }
    }
}

/// Rows of one subcommand plus summary values and invariant failures.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    /// `(key, row)`; rows are emitted sorted by key.
    pub rows: Vec<(Vec<i64>, Vec<Cell>)>,
    pub summary: Vec<(String, Cell)>,
    pub failures: Vec<String>,
}

impl Table {
    pub fn new(command: &'static str) -> Self {
        Self { command, rows: Vec::new(), summary: Vec::new(), failures: Vec::new() }
    }

    pub fn push(&mut self, key: Vec<i64>, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), schema::get(self.command).columns.len());
        self.rows.push((key, row));
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_string(), value.into()));
    }

    fn sorted(&self) -> Vec<&Vec<Cell>> {
        let mut rows: Vec<&(Vec<i64>, Vec<Cell>)> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        rows.into_iter().map(|r| &r.1).collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(schema::column_names(self.command)).expect("in-memory write");
        for row in self.sorted() {
            w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    fn json(&self) -> String {
        let names = schema::column_names(self.command);
        let rows: Vec<Value> = self
            .sorted()
            .into_iter()
            .map(|row| Value::Object(names.iter().zip(row).map(|(n, c)| (n.to_string(), c.json())).collect()))
            .collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let doc = json!({
            "command": self.command,
            "schema_version": schema::get(self.command).version,
            "rows": rows,
            "summary": summary,
            "failures": self.failures,
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    /// One line per summary value and failure, for stderr.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.summary {
            out.push_str(&format!("{k}: {}\n", v.text()));
        }
        for f in &self.failures {
            out.push_str(&format!("FAILED: {f}\n"));
        }
        out
    }
}
