use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Serialize)]
struct FileEntry {
    file: String,
    columns: Vec<String>,
    rows: usize,
    regenerates: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    files: &'a [FileEntry],
}

/// Output directory: CSV files plus a `manifest.json` describing them.
pub struct Output {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

pub type BoxError = Box<dyn std::error::Error>;

impl Output {
    pub fn new(dir: &Path) -> Result<Self, BoxError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<I>(&mut self, name: &str, columns: &[&str], regenerates: &str, rows: I) -> Result<usize, BoxError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(columns)?;
        let mut n = 0;
        for row in rows {
            w.write_record(&row)?;
            n += 1;
        }
        w.flush()?;
        self.files.push(FileEntry {
            file: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: n,
            regenerates: regenerates.to_string(),
        });
        Ok(n)
    }

    /// Write prepared contents and list them in the manifest.
    pub fn file(
        &mut self,
        name: &str,
        columns: &[&str],
        regenerates: &str,
        contents: &str,
        rows: usize,
    ) -> Result<(), BoxError> {
        fs::write(self.path(name), contents)?;
        self.files.push(FileEntry {
            file: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
            regenerates: regenerates.to_string(),
        });
        Ok(())
    }

    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> Result<(), BoxError> {
        let m = Manifest {
            command,
            config,
            files: &self.files,
        };
        fs::write(self.path("manifest.json"), serde_json::to_string_pretty(&m)?)?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
