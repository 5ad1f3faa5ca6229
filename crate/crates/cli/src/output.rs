//! Artifact files of one run. Each file carries the tool version and the
//! config hash: CSV and text files as leading `#` lines, JSON as a `meta` object.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Artifacts {
    pub fn new(dir: &Path, hash: String) -> Result<Self, String> {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        Ok(Artifacts { dir: dir.to_path_buf(), hash, written: vec![] })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn create(&mut self, name: &str) -> Result<(File, PathBuf), String> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.written.push(path.clone());
        Ok((f, path))
    }

    fn header(&self) -> String {
        format!("# conelab {VERSION}\n# config-sha256 {}\n", self.hash)
    }

    pub fn csv(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), String> {
        let header = self.header();
        let (mut f, path) = self.create(name)?;
        let err = |e: &dyn std::fmt::Display| format!("writing {}: {e}", path.display());
        f.write_all(header.as_bytes()).map_err(|e| err(&e))?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns).map_err(|e| err(&e))?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render)).map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))
    }

    pub fn json(&mut self, name: &str, body: &impl Serialize) -> Result<(), String> {
        let mut value = serde_json::to_value(body).map_err(|e| format!("serializing {name}: {e}"))?;
        let meta = json!({ "version": VERSION, "config_hash": self.hash });
        match &mut value {
            Value::Object(map) => {
                map.insert("meta".into(), meta);
            }
            other => value = json!({ "meta": meta, "data": other.take() }),
        }
        let (mut f, path) = self.create(name)?;
        let text = serde_json::to_string_pretty(&value).expect("json value serializes");
        writeln!(f, "{text}").map_err(|e| format!("writing {}: {e}", path.display()))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), String> {
        let header = self.header();
        let (mut f, path) = self.create(name)?;
        f.write_all(header.as_bytes())
            .and_then(|_| f.write_all(body.as_bytes()))
            .map_err(|e| format!("writing {}: {e}", path.display()))
    }
}
