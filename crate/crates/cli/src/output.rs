//! JSON-lines / CSV emission with an embedded run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use rhls_core::quadrature::RuleDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Echo of the run: embedded as the first record of every output so results
/// can be replayed. Identical manifests (timestamp aside) reproduce identical
/// outputs for deterministic rules and fixed seeds.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub record: &'static str,
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleDescriptor>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, params: Value, rule: Option<RuleDescriptor>) -> Self {
        Self {
            record: "manifest",
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            params,
            rule,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

pub struct Emitter {
    writer: BufWriter<Box<dyn Write>>,
    format: Format,
    csv_columns: Option<Vec<String>>,
}

impl Emitter {
    pub fn new(out: Option<PathBuf>, format: Format) -> io::Result<Self> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout()),
        };
        Ok(Self { writer: BufWriter::new(sink), format, csv_columns: None })
    }

    /// Emits one record. JSON mode writes the serialized value as one line;
    /// CSV mode flattens top-level scalars, fixing the column set from the
    /// first record (the manifest goes out as a comment line).
    pub fn emit<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        let json = serde_json::to_value(value).expect("record serializes");
        match self.format {
            Format::Json => writeln!(self.writer, "{json}"),
            Format::Csv => self.emit_csv(&json),
        }
    }

    fn emit_csv(&mut self, json: &Value) -> io::Result<()> {
        if json.get("record").and_then(Value::as_str) == Some("manifest") {
            return writeln!(self.writer, "# {json}");
        }
        let obj = match json.as_object() {
            Some(o) => o,
            None => return writeln!(self.writer, "# {json}"),
        };
        if self.csv_columns.is_none() {
            let cols: Vec<String> = obj
                .iter()
                .filter(|(_, v)| !(v.is_array() || v.is_object()))
                .map(|(k, _)| k.clone())
                .collect();
            writeln!(self.writer, "{}", cols.join(","))?;
            self.csv_columns = Some(cols);
        }
        let cols = self.csv_columns.as_ref().unwrap().clone();
        let row: Vec<String> = cols
            .iter()
            .map(|c| match obj.get(c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => {
                    if s.contains(',') || s.contains('"') {
                        format!("\"{}\"", s.replace('"', "\"\""))
                    } else {
                        s.clone()
                    }
                }
                Some(v) => v.to_string(),
            })
            .collect();
        writeln!(self.writer, "{}", row.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.writer.flush()
    }
}

/// Worker count for parallel sweeps, from RHLS_THREADS (default 1).
pub fn thread_count() -> usize {
    std::env::var("RHLS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or(1)
}
