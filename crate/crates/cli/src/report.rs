//! Canonical report emission: JSON with sorted keys and CSV, every float
//! printed with 12 significant digits, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// 12 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Render a JSON value canonically: object keys sorted (serde_json's map
/// is ordered), arrays in order, floats via [`fmt_float`], integers plain.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{}", fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            let _ = write!(out, "{}", Value::String(s.clone()));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(item, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let len = map.len();
            for (k, (key, item)) in map.iter().enumerate() {
                pad(indent + 1, out);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(item, indent + 1, out);
                if k + 1 < len {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Incremental CSV writer with the same float convention.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        let rendered: Vec<String> = fields
            .iter()
            .map(|f| match f {
                CsvField::Int(i) => i.to_string(),
                CsvField::Float(x) => fmt_float(*x),
                CsvField::Str(s) => s.clone(),
            })
            .collect();
        self.buf.push_str(&rendered.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub enum CsvField {
    Int(i64),
    Float(f64),
    Str(String),
}

/// Write text to a file, creating parent directories first, or to stdout
/// when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("writing to stdout")
        }
    }
}
