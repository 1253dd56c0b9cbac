//! Result tables, assertions and their CSV/JSON rendering.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Vector(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl From<&[f64]> for Cell {
    fn from(v: &[f64]) -> Self {
        Cell::Vector(v.to_vec())
    }
}

impl From<Vec<f64>> for Cell {
    fn from(v: Vec<f64>) -> Self {
        Cell::Vector(v)
    }
}

/// Seventeen significant digits, scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Vector(v) => v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(";"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json_num(*v),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Vector(v) => Value::Array(v.iter().map(|c| json_num(*c)).collect()),
        }
    }
}

fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Holds,
}

#[derive(Clone, Debug)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion {
            name: name.into(),
            value,
            bound,
            relation: Relation::AtMost,
            passed: value <= bound,
            detail: String::new(),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Assertion {
            name: name.into(),
            value,
            bound,
            relation: Relation::AtLeast,
            passed: value >= bound,
            detail: String::new(),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.into(),
            value: f64::NAN,
            bound: f64::NAN,
            relation: Relation::Holds,
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        match self.relation {
            Relation::AtMost => format!("{tag} {}: {} <= {}", self.name, fmt_f64(self.value), fmt_f64(self.bound)),
            Relation::AtLeast => format!("{tag} {}: {} >= {}", self.name, fmt_f64(self.value), fmt_f64(self.bound)),
            Relation::Holds => format!("{tag} {}: {}", self.name, self.detail),
        }
    }

    fn json(&self) -> Value {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Holds => "holds",
        };
        json!({
            "name": self.name,
            "relation": rel,
            "value": json_num(self.value),
            "bound": json_num(self.bound),
            "passed": self.passed,
            "detail": self.detail,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TaskOutput {
    pub index: usize,
    pub command: String,
    pub seed: u64,
    pub table: Table,
    pub summary: Vec<(String, Cell)>,
    pub assertions: Vec<Assertion>,
}

impl TaskOutput {
    pub fn new(command: &str, table: Table) -> Self {
        TaskOutput { index: 0, command: command.into(), seed: 0, table, summary: vec![], assertions: vec![] }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

/// One header (with a leading `task` column) per distinct column set, records in task order.
pub fn render_csv(tasks: &[TaskOutput]) -> String {
    let mut out = String::new();
    let mut current: Option<&Vec<String>> = None;
    for t in tasks {
        if current != Some(&t.table.columns) {
            if current.is_some() {
                out.push('\n');
            }
            let _ = writeln!(out, "task,{}", t.table.columns.join(","));
            current = Some(&t.table.columns);
        }
        for row in &t.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{},{}", t.index, cells.join(","));
        }
    }
    out
}

pub fn render_json(meta: &Metadata, tasks: &[TaskOutput]) -> String {
    let tasks: Vec<Value> = tasks
        .iter()
        .map(|t| {
            let records: Vec<Value> = t
                .table
                .rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in t.table.columns.iter().zip(row) {
                        m.insert(c.clone(), v.json());
                    }
                    Value::Object(m)
                })
                .collect();
            let mut summary = Map::new();
            for (k, v) in &t.summary {
                summary.insert(k.clone(), v.json());
            }
            json!({
                "task": t.index,
                "command": t.command,
                "seed": t.seed,
                "columns": t.table.columns,
                "records": records,
                "summary": Value::Object(summary),
                "assertions": t.assertions.iter().map(Assertion::json).collect::<Vec<_>>(),
                "passed": t.passed(),
            })
        })
        .collect();
    let doc = json!({
        "metadata": {
            "command": meta.command,
            "config_hash": meta.config_hash,
            "seed": meta.seed,
            "versions": { "nullkit": meta.version },
        },
        "tasks": tasks,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

/// Human-readable summary and assertion lines, for stderr.
pub fn render_report(tasks: &[TaskOutput]) -> String {
    let mut out = String::new();
    for t in tasks {
        let _ = writeln!(out, "task {} ({}), seed {}: {} records", t.index, t.command, t.seed, t.table.rows.len());
        for (k, v) in &t.summary {
            let _ = writeln!(out, "  {k} = {}", v.csv());
        }
        for a in &t.assertions {
            let _ = writeln!(out, "  {}", a.line());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        let v = 2.0f64.sqrt();
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_groups_headers() {
        let mut a = TaskOutput::new("x", Table::new(&["a", "b"]));
        a.table.push(vec![1.0.into(), vec![1.0, 2.0].into()]);
        let mut b = a.clone();
        b.index = 1;
        let text = render_csv(&[a, b]);
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("task,a,b\n0,1.0000000000000000e0,"));
        assert!(text.contains(";2.0000000000000000e0"));
    }

    #[test]
    fn assertion_relations() {
        assert!(Assertion::at_most("r", 1e-9, 1e-8).passed);
        assert!(!Assertion::at_most("r", f64::NAN, 1e-8).passed);
        assert!(Assertion::at_least("s", 0.6, 0.5).passed);
        assert!(Assertion::holds("h", false, "no").line().starts_with("FAIL h"));
    }
}
