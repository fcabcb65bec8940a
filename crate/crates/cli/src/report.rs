//! The `stein-clt-report/1` CSV and JSON writers.
//!
//! CSV output starts with `# key=value` preamble lines (schema, tool,
//! command, config, truncation, summary), followed by a header row and one
//! row per grid cell. JSON output carries the same content in one object.

use serde_json::{json, Map, Value};
use stein_clt::Complex64;

use crate::args::Format;

pub const REPORT_SCHEMA: &str = "stein-clt-report/1";

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub truncation: Option<Value>,
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &'static str, config: Value, columns: &[&'static str]) -> Self {
        Report {
            command,
            config,
            truncation: None,
            summary: Map::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn render(&self, format: Format) -> String {
        let mut summary = self.summary.clone();
        summary.insert("passed".into(), Value::Bool(self.passed));
        match format {
            Format::Csv => self.render_csv(&Value::Object(summary)),
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(r)
                                .map(|(c, v)| (c.to_string(), v.clone()))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = json!({
                    "schema": REPORT_SCHEMA,
                    "tool": tool(),
                    "command": self.command,
                    "config": self.config,
                    "truncation": self.truncation,
                    "summary": summary,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("values serialize");
                s.push('\n');
                s
            }
        }
    }

    fn render_csv(&self, summary: &Value) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema={REPORT_SCHEMA}\n"));
        out.push_str(&format!("# tool={}\n", tool()));
        out.push_str(&format!("# command={}\n", self.command));
        out.push_str(&format!("# config={}\n", self.config));
        if let Some(t) = &self.truncation {
            out.push_str(&format!("# truncation={t}\n"));
        }
        out.push_str(&format!("# summary={summary}\n"));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn tool() -> String {
    format!("stein-clt {}", env!("CARGO_PKG_VERSION"))
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn num(v: f64) -> Value {
    Value::from(v)
}

pub fn re_im(z: Complex64) -> [Value; 2] {
    [num(z.re), num(z.im)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = Report::new("gap", json!({"seed": 1}), &["n", "t", "gap"]);
        r.push(vec![Value::from(25), Value::from("1"), num(0.5)]);
        r.summary("max_gap", 0.5);
        let text = r.render(Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema=stein-clt-report/1");
        assert!(lines[1].starts_with("# tool=stein-clt "));
        assert_eq!(lines[2], "# command=gap");
        assert_eq!(lines[3], "# config={\"seed\":1}");
        assert_eq!(lines[4], "# summary={\"max_gap\":0.5,\"passed\":true}");
        assert_eq!(lines[5], "n,t,gap");
        assert_eq!(lines[6], "25,1,0.5");
    }

    #[test]
    fn json_rows_are_objects() {
        let mut r = Report::new("gap", json!({}), &["n", "gap"]);
        r.push(vec![Value::from(3), Value::Null]);
        let v: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["n"], 3);
        assert!(v["rows"][0]["gap"].is_null());
        assert_eq!(v["schema"], REPORT_SCHEMA);
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_cell(&Value::from("a,b")), "\"a,b\"");
        assert_eq!(csv_cell(&Value::from("1;2")), "1;2");
    }
}
