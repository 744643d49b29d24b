//! JSON and CSV emission.

use std::io::Write;
use std::path::Path;

use clap::{Args, ValueEnum};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<std::path::PathBuf>,
}

/// A rectangular view of a document for CSV output.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

/// A command's result: the JSON document, plus an optional table that
/// replaces the generic flattening in CSV mode.
pub struct Document {
    pub json: Value,
    pub table: Option<Table>,
}

impl Document {
    pub fn new(json: Value) -> Self {
        Self { json, table: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

/// Formats a number for CSV: integers verbatim, floats with 17
/// significant digits so that they round-trip.
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => csv_number(n.as_f64().unwrap_or(f64::NAN)),
        },
        other => other.to_string(),
    }
}

/// Flattens a document into `path,value` pairs with dotted paths.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

pub fn render(doc: &Document, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&doc.json).map_err(|e| CliError::Output(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Output(e.to_string());
            match &doc.table {
                Some(t) => {
                    w.write_record(&t.headers).map_err(io)?;
                    for row in &t.rows {
                        w.write_record(row.iter().map(csv_cell)).map_err(io)?;
                    }
                }
                None => {
                    let mut pairs = Vec::new();
                    flatten("", &doc.json, &mut pairs);
                    w.write_record(["key", "value"]).map_err(io)?;
                    for (k, v) in pairs {
                        w.write_record([k, csv_cell(&v)]).map_err(io)?;
                    }
                }
            }
            w.into_inner().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

pub fn emit(doc: &Document, args: &OutputArgs) -> Result<(), CliError> {
    let bytes = render(doc, args.format)?;
    match &args.output {
        Some(p) => write_file(p, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn write_file(p: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(p, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", p.display())))
}
