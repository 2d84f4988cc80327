//! Output documents: JSON (default) or CSV, to stdout or a file.
//!
//! Documents are built deterministically — equal inputs and seeds produce
//! byte-identical output. Diagnostics never mix into the data stream.

use std::io::Write;
use std::path::PathBuf;

use bloch_holonomy::Rotation;
use nalgebra::{Matrix3, Vector3};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command result that can render as JSON or as a CSV table.
pub struct Document {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Document {
    /// Single-record document: one CSV row holding the flattened values.
    pub fn record(json: Value, fields: Vec<(&str, String)>) -> Document {
        Document {
            json,
            header: fields.iter().map(|(k, _)| k.to_string()).collect(),
            rows: vec![fields.into_iter().map(|(_, v)| v).collect()],
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                s.push_str(&self.header.join(","));
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }

    pub fn emit(&self, format: Format, out: &Option<PathBuf>) -> Result<(), CliError> {
        let body = self.render(format);
        match out {
            None => {
                std::io::stdout()
                    .write_all(body.as_bytes())
                    .map_err(|e| CliError::io(format!("writing stdout: {e}")))?;
            }
            Some(path) => {
                std::fs::write(path, body)
                    .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
            }
        }
        Ok(())
    }
}

pub fn vec3_json(v: &Vector3<f64>) -> Value {
    json!([v.x, v.y, v.z])
}

/// Row-major 9-element array.
pub fn matrix_json(m: &Matrix3<f64>) -> Value {
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            out.push(json!(m[(i, j)]));
        }
    }
    Value::Array(out)
}

pub fn rotation_json(r: &Rotation) -> Value {
    matrix_json(r.matrix())
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
