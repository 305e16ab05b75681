//! Output directory bookkeeping and the checksum manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pfl_core::field::io::{save_pgm16, save_snapshot};
use pfl_core::Field2D;
use sha2::{Digest, Sha256};

use crate::config::Emit;
use crate::RunError;

pub const MANIFEST: &str = "manifest.txt";

/// Writes artifacts below one directory and remembers each file.
pub struct Artifacts {
    root: PathBuf,
    emit: Emit,
    files: Vec<PathBuf>,
}

fn io_err(path: &Path, source: io::Error) -> RunError {
    RunError::Io { path: path.display().to_string(), source }
}

impl Artifacts {
    pub fn create(root: &Path, emit: Emit) -> Result<Self, RunError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Artifacts { root: root.to_path_buf(), emit, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn emit(&self) -> Emit {
        self.emit
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.root).unwrap_or(path).to_path_buf();
        if !self.files.contains(&rel) {
            self.files.push(rel);
        }
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<(), RunError> {
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|e| io_err(&path, e))?;
        self.record(&path);
        Ok(())
    }

    /// Skipped unless CSV output is enabled.
    pub fn csv(&mut self, name: &str, content: &str) -> Result<(), RunError> {
        if self.emit.csv {
            self.text(name, content)?;
        }
        Ok(())
    }

    /// Density image plus its scale sidecar; skipped unless PGM output is enabled.
    pub fn density_pgm(&mut self, name: &str, field: &Field2D) -> Result<(), RunError> {
        let g = field.grid();
        self.pgm(name, g.nx(), g.ny(), &field.density(), "density |E|^2")
    }

    pub fn pgm(&mut self, name: &str, width: usize, height: usize, data: &[f64], label: &str) -> Result<(), RunError> {
        if !self.emit.pgm {
            return Ok(());
        }
        let path = self.root.join(name);
        let written = save_pgm16(&path, width, height, data, label).map_err(|e| RunError::core(name, e))?;
        for p in &written {
            self.record(p);
        }
        Ok(())
    }

    pub fn snapshot(&mut self, name: &str, field: &Field2D, z: f64) -> Result<(), RunError> {
        let path = self.root.join(name);
        save_snapshot(&path, field, z).map_err(|e| RunError::core(name, e))?;
        self.record(&path);
        Ok(())
    }

    /// Writes the manifest: one `sha256  bytes  path` line per recorded file,
    /// sorted by path. The manifest does not list itself.
    pub fn finish(self) -> Result<PathBuf, RunError> {
        let mut files = self.files.clone();
        files.sort();
        let mut text = String::new();
        for rel in &files {
            let path = self.root.join(rel);
            let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
            let digest = Sha256::digest(&bytes);
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            text.push_str(&format!("{hex}  {}  {}\n", bytes.len(), rel.display()));
        }
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Parsed manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub sha256: String,
    pub bytes: u64,
    pub path: String,
}

pub fn read_manifest(text: &str) -> Vec<ManifestEntry> {
    text.lines()
        .filter_map(|l| {
            let mut it = l.splitn(3, "  ");
            Some(ManifestEntry {
                sha256: it.next()?.to_string(),
                bytes: it.next()?.parse().ok()?,
                path: it.next()?.to_string(),
            })
        })
        .collect()
}
