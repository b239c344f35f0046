//! Run directory layout: verbatim config echo, CSVs with a `#` metadata
//! preamble, and one `summary.json`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "anosov-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunOutput {
    dir: PathBuf,
    subcommand: &'static str,
    config_hash: String,
    seed: u64,
    parameters: Value,
}

impl RunOutput {
    /// Creates the directory and writes `config.toml`.
    pub fn create(dir: &Path, subcommand: &'static str, config_text: &str, seed: u64, parameters: Value) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), config_text)?;
        Ok(RunOutput { dir: dir.to_path_buf(), subcommand, config_hash: sha256_hex(config_text), seed, parameters })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tool", TOOL.to_string()),
            ("version", VERSION.to_string()),
            ("subcommand", self.subcommand.to_string()),
            ("config_sha256", self.config_hash.clone()),
            ("seed", self.seed.to_string()),
            ("parameters", self.parameters.to_string()),
        ]
    }

    /// Writes `name` with the metadata preamble followed by `body`.
    pub fn csv<F>(&self, name: &str, body: F) -> io::Result<()>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        for (k, v) in self.metadata() {
            writeln!(w, "# {k}: {v}")?;
        }
        body(&mut w)?;
        w.flush()
    }

    /// Writes `summary.json`: metadata, the verdict and `results`.
    pub fn summary(&self, verdict: Option<bool>, label: Option<&str>, results: Value) -> io::Result<()> {
        let mut m = Map::new();
        for (k, v) in self.metadata() {
            if k == "parameters" {
                m.insert(k.into(), self.parameters.clone());
            } else if k == "seed" {
                m.insert(k.into(), json!(self.seed));
            } else {
                m.insert(k.into(), json!(v));
            }
        }
        let verdict = match verdict {
            Some(true) => json!("pass"),
            Some(false) => json!("fail"),
            None => Value::Null,
        };
        m.insert("verdict".into(), verdict);
        if let Some(l) = label {
            m.insert("classification".into(), json!(l));
        }
        m.insert("results".into(), results);
        let mut text = serde_json::to_string_pretty(&Value::Object(m))?;
        text.push('\n');
        fs::write(self.dir.join("summary.json"), text)
    }
}
