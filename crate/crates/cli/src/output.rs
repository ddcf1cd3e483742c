//! Output files: atomic writes, CSV/JSON tables and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A table produced by a command, held as CSV text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

impl Table {
    pub fn from_writer(
        name: impl Into<String>,
        write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Self {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory cannot fail");
        Self {
            name: name.into(),
            csv: String::from_utf8(buf).expect("CSV output is UTF-8"),
        }
    }

    /// Array of row objects keyed by the header. Empty cells become `null`;
    /// numeric cells become numbers where JSON can represent them.
    pub fn to_json(&self) -> String {
        let mut lines = self.csv.lines();
        let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
        let rows: Vec<Value> = lines
            .map(|line| {
                let mut obj = Map::new();
                for (k, cell) in header.iter().zip(line.split(',')) {
                    let v = if cell.is_empty() {
                        Value::Null
                    } else {
                        match cell.parse::<f64>().ok().and_then(Number::from_f64) {
                            Some(n) => Value::Number(n),
                            None => Value::String(cell.to_string()),
                        }
                    };
                    obj.insert((*k).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv.clone(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Derived {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_intensities: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_r_nl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown_xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manley_rowe_drift: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// Everything needed to understand and re-run a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
    pub derived: Derived,
    pub summary: Summary,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: Option<ScenarioConfig>) -> Self {
        Self {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config,
            derived: Derived::default(),
            summary: Summary::default(),
            outputs: Vec::new(),
        }
    }
}

/// Result of one command before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stem: String,
    pub tables: Vec<Table>,
    pub svgs: Vec<(String, String)>,
    pub manifest: Manifest,
}

impl RunOutput {
    /// Writes tables, optional SVGs and the manifest; returns written paths.
    pub fn write(mut self, dir: &Path, format: Format, svg: bool) -> CliResult<Vec<PathBuf>> {
        let mut written = Vec::new();
        for t in &self.tables {
            let name = t.file_name(format);
            let path = dir.join(&name);
            write_atomic(&path, t.render(format).as_bytes())?;
            self.manifest.outputs.push(name);
            written.push(path);
        }
        if svg {
            for (name, body) in &self.svgs {
                let path = dir.join(name);
                write_atomic(&path, body.as_bytes())?;
                self.manifest.outputs.push(name.clone());
                written.push(path);
            }
        }
        let path = dir.join(format!("{}.manifest.json", self.stem));
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_to_json() {
        let t = Table {
            name: "t".into(),
            csv: "a,b,c\n1.5e0,,inf\n".into(),
        };
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["a"], Value::from(1.5));
        assert_eq!(v[0]["b"], Value::Null);
        assert_eq!(v[0]["c"], Value::from("inf"));
        assert_eq!(t.file_name(Format::Json), "t.json");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
