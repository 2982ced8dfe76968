//! Atomic file output and key=value / JSON reports.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

/// Writes `bytes` to a temporary sibling of `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Ordered report printed as `key=value` lines and optionally saved as JSON.
#[derive(Debug, Default)]
pub struct Report {
    entries: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.set("command", command);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join(","),
                other => plain(other),
            };
            out.push_str(&format!("{k}={text}\n"));
        }
        out
    }

    /// Prints the report and writes the JSON copy when a path is given.
    pub fn emit(&self, json_path: Option<&Path>) -> Result<()> {
        if let Some(path) = json_path {
            let mut json = serde_json::to_vec_pretty(&self.entries)?;
            json.push(b'\n');
            write_atomic(path, &json)?;
        }
        print!("{}", self.to_lines());
        Ok(())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
