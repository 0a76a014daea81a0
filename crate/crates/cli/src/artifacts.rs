use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::svg::Figure;

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// path relative to the run directory
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Writes run outputs into one directory and records their hashes.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(Artifacts {
            dir,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn into_files(self) -> Vec<OutputFile> {
        self.files
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, data)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputFile {
            path: name.to_string(),
            bytes: data.len() as u64,
            sha256: sha256_hex(data),
        });
        Ok(())
    }

    /// CSV with a header row taken from the field names of `T`.
    pub fn write_csv<T: Serialize>(
        &mut self,
        name: &str,
        rows: impl IntoIterator<Item = T>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        let data = w
            .into_inner()
            .map_err(|e| CliError::io("flushing csv", e.into_error()))?;
        self.write_bytes(name, &data)
    }

    pub fn write_svg(&mut self, name: &str, fig: &Figure) -> Result<()> {
        self.write_bytes(name, fig.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        x: f64,
        label: &'static str,
    }

    #[test]
    fn files_are_hashed_and_deduplicated() {
        let tmp = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(tmp.path().join("run")).unwrap();
        a.write_csv(
            "t.csv",
            [
                Row { x: 1.5, label: "a" },
                Row {
                    x: -2.0,
                    label: "b",
                },
            ],
        )
        .unwrap();
        let text = fs::read_to_string(a.dir().join("t.csv")).unwrap();
        assert_eq!(text, "x,label\n1.5,a\n-2.0,b\n");
        a.write_bytes("t.csv", b"abc").unwrap();
        assert_eq!(a.files().len(), 1);
        assert_eq!(
            a.files()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
