//! Output directory handling and number formatting.
//!
//! Every float written to CSV or JSON is rounded to 10 significant digits
//! and printed in shortest round-trip form, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{report_err, CliResult};
use crate::manifest::FileDigest;

pub const SIGNIFICANT_DIGITS: usize = 10;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    serde_json::Number::from_f64(round_sig(x))
        .map(|n| n.to_string())
        .unwrap_or_else(|| "NaN".into())
}

/// Rounds every non-integer number in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn to_json_string(value: &impl Serialize) -> CliResult<String> {
    let v = serde_json::to_value(value).map_err(report_err)?;
    let mut s = serde_json::to_string_pretty(&round_json(v)).map_err(report_err)?;
    s.push('\n');
    Ok(s)
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Directory the run writes into; remembers every file for the manifest.
pub struct OutDir {
    root: PathBuf,
    written: Vec<FileDigest>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .map_err(|e| report_err(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| report_err(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text).map_err(|e| report_err(format!("cannot write {}: {e}", path.display())))?;
        let sha256 = ou_discount::ingest::file_sha256(&path).map_err(report_err)?;
        self.written.push(FileDigest {
            path: PathBuf::from(name),
            sha256,
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        self.write_text(name, &to_json_string(value)?)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> CliResult<()> {
        self.write_text(name, &table.render())
    }

    pub fn written(&self) -> &[FileDigest] {
        &self.written
    }
}
