//! Artifact writing: CSV tables, JSON documents, checksummed manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// RFC-4180 table with a one-line header. Fields holding separators,
/// quotes or line breaks are quoted.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self { text: String::new(), width: header.len() };
        c.push_fields(header.iter().map(|h| h.to_string()));
        c
    }

    fn push_fields(&mut self, fields: impl Iterator<Item = String>) {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            first = false;
            if f.contains([',', '"', '\n', '\r']) {
                self.text.push('"');
                self.text.push_str(&f.replace('"', "\"\""));
                self.text.push('"');
            } else {
                self.text.push_str(&f);
            }
        }
        self.text.push_str("\r\n");
    }

    /// Appends a row; `None` becomes an empty field.
    pub fn row(&mut self, values: &[Cell]) {
        debug_assert_eq!(values.len(), self.width);
        self.push_fields(values.iter().map(Cell::render));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Shortest round-trip representation, so reruns compare byte for byte.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

/// Everything needed to reproduce and audit a preset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: super::ExperimentConfig,
    /// Per-run parameters after presets, quick mode and overrides.
    pub resolved: Vec<super::ResolvedRun>,
    pub code_version: String,
    pub seed: u64,
    pub wall_clock_s: f64,
    /// File name → SHA-256 of its contents.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Collects artifacts of one invocation and records their checksums.
pub struct OutputSet {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
    files: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), checksums: BTreeMap::new(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        self.files.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes the manifest last so its presence marks a complete run.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<Vec<PathBuf>> {
        manifest.checksums = self.checksums.clone();
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        write_atomic(&path, s.as_bytes())?;
        self.files.push(path);
        Ok(self.files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_quotes_and_crlf() {
        let mut c = Csv::new(&["a", "b,c"]);
        c.row(&[Cell::Num(0.1), Cell::Text("say \"hi\"".into())]);
        c.row(&[Cell::Empty, Cell::Int(3)]);
        assert_eq!(c.into_string(), "a,\"b,c\"\r\n0.1,\"say \"\"hi\"\"\"\r\n,3\r\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -1.5, 1e-300, std::f64::consts::PI, 6.02e23] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
