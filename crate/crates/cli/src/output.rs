use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest as _, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// An output directory whose files are written atomically and recorded for
/// the manifest.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<FileDigest>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.path(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(bytes).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &target).map_err(io)?;
        self.written.retain(|d| d.name != name);
        self.written.push(FileDigest { name: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the effective configuration and the manifest.
    pub fn finish(
        mut self,
        command: &str,
        seed: u64,
        config_toml: &str,
        inputs: Vec<FileDigest>,
    ) -> Result<Manifest, CliError> {
        self.write("config.toml", config_toml.as_bytes())?;
        let manifest = Manifest {
            tool: "pvnne".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config_sha256: sha256_hex(config_toml.as_bytes()),
            inputs,
            outputs: self.written.clone(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}

/// Reads a file and records its digest under its file name.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, FileDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let digest = FileDigest { name, sha256: sha256_hex(&bytes) };
    Ok((bytes, digest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn writes_are_atomic_and_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("o")).unwrap();
        out.write("a.txt", b"one").unwrap();
        out.write("a.txt", b"two").unwrap();
        let m = out.finish("synth", 1, "seed = 1\n", vec![]).unwrap();
        assert_eq!(fs::read(dir.path().join("o/a.txt")).unwrap(), b"two");
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[0].sha256, sha256_hex(b"two"));
        let names: Vec<_> = fs::read_dir(dir.path().join("o")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert!(names.iter().all(|n| !n.to_string_lossy().ends_with(".tmp")));
    }
}
