use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, Task};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of one task: a fixed-schema table plus structured outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub task: Task,
    pub schema: u32,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(task: Task, schema: u32, inputs: BTreeMap<String, String>, columns: &[&'static str]) -> Self {
        Report {
            task,
            schema,
            inputs,
            outputs: Map::new(),
            diagnostics: Map::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn output(&mut self, key: &str, v: impl Serialize) {
        self.outputs.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn diag(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn schema_tag(&self) -> String {
        format!("{}:{}", self.task.name(), self.schema)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# fraclab v{VERSION} schema={}\n", self.schema_tag());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| csv_cell(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut diagnostics = self.diagnostics.clone();
        diagnostics.insert("checks_passed".into(), json!(self.passed()));
        diagnostics.insert("failures".into(), json!(self.failures));
        let doc = json!({
            "task": self.task.name(),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "diagnostics": diagnostics,
            "versions": { "fraclab": VERSION, "schema": self.schema_tag() },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn vec_cell(v: &[f64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}
