use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;

pub const TOOL: &str = "cloudmap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_DIR_ENV: &str = "CLOUDMAP_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Divergence(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Divergence(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Divergence(m) => write!(f, "numeric divergence: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<cloudmap::Error> for CliError {
    fn from(e: cloudmap::Error) -> Self {
        match e {
            cloudmap::Error::Divergence { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// The resolved invocation, embedded in every output document.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, A: Serialize> {
    pub command: &'a str,
    pub args: &'a A,
    pub format: Format,
    pub out: Option<&'a Path>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// A command result: a JSON value, plus a table when the result is
/// naturally tabular.
#[derive(Debug)]
pub struct Document {
    pub json: Value,
    pub table: Option<Table>,
}

/// Shortest round-trip decimal; negative zero prints as `0`.
pub fn num(x: f64) -> String {
    (x + 0.0).to_string()
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Top-level fields as `field,value` rows for non-tabular results.
fn flatten(json: &Value) -> Table {
    let mut table = Table::new(&["field", "value"]);
    match json {
        Value::Object(map) => {
            for (k, v) in map {
                table.push(vec![k.clone(), scalar(v)]);
            }
        }
        other => table.push(vec!["result".into(), scalar(other)]),
    }
    table
}

pub fn render<A: Serialize>(doc: &Document, config: &RunConfig<'_, A>) -> Result<String, CliError> {
    let config_json = serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?;
    match config.format {
        Format::Json => {
            let envelope = json!({
                "tool": TOOL,
                "version": VERSION,
                "config": config_json,
                "result": doc.json,
            });
            let mut s = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut out = format!("# {TOOL} {VERSION}\n# config {config_json}\n");
            let flat;
            let table = match &doc.table {
                Some(t) => t,
                None => {
                    flat = flatten(&doc.json);
                    &flat
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns).map_err(|e| CliError::Io(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?);
            Ok(out)
        }
    }
}

/// `--out` if given, otherwise a file named after the command in
/// `$CLOUDMAP_OUT_DIR` when that is set.
pub fn resolve_out(explicit: Option<&Path>, command: &str, format: Format) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
    })
}
