//! Output directory with provenance headers on every file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use pluripot::{MeasureField, Potential, ToricModel};

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub grid: String,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header,
    result: &'a T,
}

/// Hash of the canonical serialization of a parsed config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_string(config).expect("configs serialize");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

pub struct Output {
    dir: PathBuf,
    pub header: Header,
}

impl Output {
    pub fn create(dir: &Path, header: Header) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
        })
    }

    fn tags(&self) -> String {
        let h = &self.header;
        format!(
            "tool={} version={} command={} config_sha256={} seed={}",
            h.tool, h.version, h.command, h.config_sha256, h.seed
        )
    }

    fn write(&self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// CSV with a `#` header line.
    pub fn csv(&self, name: &str, body: &str) -> Result<(), Failure> {
        self.write(name, &format!("# {} {}\n{body}", self.tags(), self.header.grid))
    }

    /// JSON document `{ "header": ..., "result": ... }`.
    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<(), Failure> {
        let doc = Document {
            header: &self.header,
            result,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Config(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn potential(&self, name: &str, model: &ToricModel, psi: &Potential) -> Result<(), Failure> {
        self.write(name, &pluripot::io::write_potential_tagged(model, psi, &self.tags())?)
    }

    pub fn measure(&self, name: &str, model: &ToricModel, mu: &MeasureField) -> Result<(), Failure> {
        self.write(name, &pluripot::io::write_measure_tagged(model, mu, &self.tags())?)
    }
}
