//! Output directories, atomic writes and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::config::config_err;

pub const TOOL: &str = "fep";
/// Version of the CSV column layouts.
pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
/// Default output root when `--out` is absent.
pub const OUT_ROOT_VAR: &str = "FEP_OUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    /// Subcommand path, e.g. `["sweep", "afep-slope"]`.
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub params: Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if m.tool != TOOL || m.schema != SCHEMA_VERSION {
            return Err(config_err(format!(
                "{} was written by {} schema {}, expected {TOOL} schema {SCHEMA_VERSION}",
                path.display(),
                m.tool,
                m.schema
            )));
        }
        Ok(m)
    }
}

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    /// `out`, else `$FEP_OUT_ROOT/<slug>`, else `fep-out/<slug>`.
    pub fn resolve(out: Option<&Path>, slug: &str) -> Result<Self> {
        let dir = match out {
            Some(d) => d.to_path_buf(),
            None => std::env::var_os(OUT_ROOT_VAR).map_or_else(|| PathBuf::from("fep-out"), PathBuf::from).join(slug),
        };
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes through a temporary file in the same directory and renames.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).with_context(|| format!("temp file in {}", self.dir.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).with_context(|| format!("renaming onto {}", target.display()))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(target)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn write_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<PathBuf> {
        self.write(name, &csv_bytes(rows)?)
    }

    /// Writes the manifest last, listing every file written before it.
    pub fn finish(mut self, command: &[&str], params: Value) -> Result<PathBuf> {
        let seed = params.get("seed").and_then(Value::as_u64);
        let m = Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema: SCHEMA_VERSION,
            command: command.iter().map(|s| s.to_string()).collect(),
            seed,
            params,
            outputs: self.written.clone(),
        };
        self.write_json(MANIFEST, &m)?;
        Ok(self.dir)
    }
}

pub fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::resolve(Some(dir.path()), "x").unwrap();
        out.write("a.csv", b"x\n1\n").unwrap();
        out.write("a.csv", b"x\n2\n").unwrap();
        out.finish(&["hit"], json!({"seed": 5})).unwrap();
        let m = Manifest::read(dir.path()).unwrap();
        assert_eq!(m.outputs, vec!["a.csv".to_string()]);
        assert_eq!(m.seed, Some(5));
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n2\n");
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 2);
    }

    #[test]
    fn missing_manifest_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let e = Manifest::read(dir.path()).unwrap_err();
        assert!(e.downcast_ref::<crate::config::ConfigError>().is_some());
    }
}
