//! Output directory that cleans up after itself unless committed.

use std::fs;
use std::path::{Path, PathBuf};

use fishnet::report::{write_json, Table};
use serde::Serialize;

use crate::CliError;

pub struct Outputs {
    dir: PathBuf,
    created: Vec<PathBuf>,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        let mut out = Self {
            dir: dir.to_path_buf(),
            created: Vec::new(),
            files: Vec::new(),
            committed: false,
        };
        out.ensure_dir(dir)?;
        Ok(out)
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        let mut missing = Vec::new();
        let mut p = dir;
        while !p.as_os_str().is_empty() && !p.exists() {
            missing.push(p.to_path_buf());
            match p.parent() {
                Some(q) => p = q,
                None => break,
            }
        }
        fs::create_dir_all(dir)?;
        self.created.extend(missing.into_iter().rev());
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Relative names of everything written so far.
    pub fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .map(|f| f.strip_prefix(&self.dir).unwrap_or(f).to_string_lossy().replace('\\', "/"))
            .collect()
    }

    fn target(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                self.ensure_dir(&parent.to_path_buf())?;
            }
        }
        self.files.push(path.clone());
        Ok(path)
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.target(name)?;
        table.write_csv(std::io::BufWriter::new(fs::File::create(path)?))?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.target(name)?;
        write_json(std::io::BufWriter::new(fs::File::create(path)?), value)?;
        Ok(())
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.created.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}
