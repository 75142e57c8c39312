use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use unraveling_lab::entropy::fmt17;

use crate::config::Format;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
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

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt17(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => number(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// JSON has no infinities; they become the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(fmt17(x))
    }
}

/// Non-finite floats inside `v` come out as `null`; route them through [`number`] instead.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable summary")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Output of one task, ready to be rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self { table, summary: Map::new() }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn note_num(&mut self, key: &str, x: f64) -> &mut Self {
        self.note(key, number(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub library_version: String,
    pub config_sha256: String,
    pub task: String,
    pub seed: u64,
    pub budget: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders a report. Both formats are byte-stable: fixed key order, LF line
/// endings and 17 significant digits.
pub fn render(prov: &Provenance, report: &Report, format: Format) -> String {
    match format {
        Format::Csv => render_csv(prov, report),
        Format::Json => render_json(prov, report),
    }
}

fn render_csv(prov: &Provenance, report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool: {}\n", prov.tool));
    out.push_str(&format!("# library_version: {}\n", prov.library_version));
    out.push_str(&format!("# config_sha256: {}\n", prov.config_sha256));
    out.push_str(&format!("# task: {}\n", prov.task));
    out.push_str(&format!("# seed: {}\n", prov.seed));
    out.push_str(&format!("# budget: {}\n", prov.budget));
    if !report.summary.is_empty() {
        out.push_str(&format!("# summary: {}\n", Value::Object(report.summary.clone())));
    }
    out.push_str(&report.table.columns.join(","));
    out.push('\n');
    for row in &report.table.rows {
        out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn render_json(prov: &Provenance, report: &Report) -> String {
    let rows: Vec<Value> = report.table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    let mut doc = Map::new();
    doc.insert("provenance".into(), to_value(prov));
    doc.insert("summary".into(), Value::Object(report.summary.clone()));
    doc.insert("columns".into(), to_value(&report.table.columns));
    doc.insert("rows".into(), Value::Array(rows));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json output");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            tool: "unraveling-lab 0.0.0".into(),
            library_version: "0.0.0".into(),
            config_sha256: sha256_hex(b""),
            task: "pressure".into(),
            seed: 7,
            budget: 10,
        }
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn csv_spells_out_infinities_and_uses_seventeen_digits() {
        let mut t = Table::new(["alpha", "value", "word"]);
        t.push(vec![0.1.into(), f64::INFINITY.into(), "a,b".into()]);
        let text = render(&prov(), &Report::new(t), Format::Csv);
        let last = text.lines().last().unwrap();
        assert_eq!(last, "1.0000000000000001e-1,inf,\"a,b\"");
        assert!(!text.contains('\r'));
        assert!(text.starts_with("# tool: unraveling-lab 0.0.0\n"));
    }

    #[test]
    fn json_output_round_trips_through_a_parser() {
        let mut t = Table::new(["x"]);
        t.push(vec![f64::NEG_INFINITY.into()]);
        let mut r = Report::new(t);
        r.note_num("max", 2.5);
        let v: Value = serde_json::from_str(&render(&prov(), &r, Format::Json)).unwrap();
        assert_eq!(v["rows"][0][0], "-inf");
        assert_eq!(v["summary"]["max"], 2.5);
        assert_eq!(v["provenance"]["seed"], 7);
    }
}
