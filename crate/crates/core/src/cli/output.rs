use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_name: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &'static str, config_name: &str, config_hash: String, seed: u64) -> Self {
        Self {
            tool: "qmqkd",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_name: config_name.to_owned(),
            config_hash,
            seed,
        }
    }
}

/// A CSV table whose first line is `# {"provenance": ...}`.
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(provenance: &Provenance, columns: &[&str]) -> Self {
        let header = json!({ "provenance": provenance });
        let mut text = format!("# {header}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{f}");
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn summary_json(provenance: &Provenance, body: Value) -> String {
    let mut doc = json!({ "provenance": provenance });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
        doc.extend(body);
    }
    serde_json::to_string_pretty(&doc).expect("summary serializes") + "\n"
}

/// Writes `text` to `path`, or to `fallback` when no path is given.
pub fn emit(text: &str, path: Option<&Path>, fallback: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => fallback.write_all(text.as_bytes())?,
    }
    Ok(())
}
