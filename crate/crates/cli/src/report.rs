use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Reproducibility record written next to every output.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub parameters: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    pub certificates: Vec<Value>,
    pub timings_ms: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: BTreeMap::new(),
            seeds: Vec::new(),
            certificates: Vec::new(),
            timings_ms: BTreeMap::new(),
            outputs: BTreeMap::new(),
            clock: Some(Instant::now()),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn lap(&mut self, stage: &str) {
        if let Some(start) = self.clock.replace(Instant::now()) {
            self.timings_ms.insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        }
    }

    pub fn certificate(&mut self, summary: Value) {
        self.certificates.push(summary);
    }

    /// Writes `value` as pretty JSON and records its digest.
    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.insert(path.display().to_string(), hex::encode(Sha256::digest(text.as_bytes())));
        Ok(())
    }

    /// Stores the report beside `primary` as `<stem>.report.json`.
    pub fn finish(mut self, primary: &Path) -> Result<PathBuf> {
        let path = sibling(primary, "report");
        self.lap("write");
        let text = serde_json::to_string_pretty(&self)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// `dir/name.json` -> `dir/name.<tag>.json`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{tag}.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/tmp/b.json"), "cert"), PathBuf::from("/tmp/b.cert.json"));
        assert_eq!(sibling(Path::new("w"), "report"), PathBuf::from("w.report.json"));
    }
}
