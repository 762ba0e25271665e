//! CSV and JSON rendering, and recovery of run parameters from either.
//!
//! CSV files open with `# key = value` metadata lines holding every resolved
//! parameter, followed by one header row and the data. JSON files carry the
//! same metadata in a `"header"` object.

use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

pub const GENERATOR: &str = concat!("brightcv ", env!("CARGO_PKG_VERSION"));

/// Metadata keys describing fixed modelling conventions. They are written to
/// every file and ignored when a file is replayed.
pub const CONVENTIONS: &[(&str, &str)] = &[
    (
        "convention.units",
        "shot-noise units, vacuum quadrature variance 1",
    ),
    ("convention.modulation", "V = 2*n_bar + 1 per mode"),
    (
        "convention.detector_noise",
        "eps_tot^2 * eta * n_bar added to Bob's block as untrusted channel-output noise",
    ),
    (
        "convention.excess_noise",
        "chi referred to the channel input, Bob sees eta*chi",
    ),
    (
        "convention.reconciliation",
        "reverse, x-quadrature homodyne at both ends",
    ),
    ("convention.distance", "0.2 dB/km, derived column only"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // `+ 0.0` folds −0 into 0
            Cell::Num(x) if x.is_finite() => format!("{:.11e}", x + 0.0),
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // 12 significant digits, as in CSV
            Cell::Num(x) if x.is_finite() => {
                let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(*x);
                json!(rounded)
            }
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Ordered metadata, starting with `generator` and `command`.
    pub header: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => render_csv(report),
        Format::Json => render_json(report),
    }
}

pub fn render_csv(report: &Report) -> String {
    let mut out = String::new();
    for (k, v) in &report.header {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&report.columns.join(","));
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(report: &Report) -> String {
    let header: Map<String, Value> = report
        .header
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({
        "header": header,
        "columns": report.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Metadata recovered from an output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedHeader {
    pub format: Format,
    pub entries: Vec<(String, String)>,
}

impl ParsedHeader {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn header_error(message: impl Into<String>) -> CliError {
    CliError::config("header", message)
}

/// Reads the metadata of a CSV or JSON output file.
pub fn parse_output_header(text: &str) -> Result<ParsedHeader> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: Value = serde_json::from_str(trimmed).map_err(|e| header_error(e.to_string()))?;
        let header = doc
            .get("header")
            .and_then(Value::as_object)
            .ok_or_else(|| header_error("JSON output has no `header` object"))?;
        let entries = header
            .iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|s| (k.clone(), s.to_string()))
                    .ok_or_else(|| header_error(format!("`{k}` is not a string")))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(ParsedHeader {
            format: Format::Json,
            entries,
        });
    }
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(meta) = line.strip_prefix('#') else {
            break;
        };
        let (k, v) = crate::config::parse_assignment(meta).map_err(|m| CliError::Syntax {
            line: i + 1,
            message: m,
        })?;
        if entries.iter().any(|(seen, _)| *seen == k) {
            return Err(CliError::Syntax {
                line: i + 1,
                message: format!("`{k}` is set twice"),
            });
        }
        entries.push((k, v));
    }
    if entries.is_empty() {
        return Err(header_error("no `# key = value` metadata found"));
    }
    Ok(ParsedHeader {
        format: Format::Csv,
        entries,
    })
}
