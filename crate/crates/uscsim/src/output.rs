use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Map, Value};
use uscsim_core::config::{SimConfig, KEYS};

/// Output directory that remembers what was written, for the manifest.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> anyhow::Result<()> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Write `manifest.json` echoing the resolved parameters and the file list.
    pub fn finish(mut self, command: &str, config: &SimConfig, options: Value) -> anyhow::Result<()> {
        self.write_text("config.txt", &config.to_text())?;
        let manifest = json!({
            "program": "uscsim",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "parameters": parameters(config),
            "options": options,
            "outputs": self.written,
        });
        self.write_json("manifest.json", &manifest)
    }
}

pub fn parameters(config: &SimConfig) -> Value {
    let map: Map<String, Value> = KEYS.iter().zip(config.values()).map(|(k, v)| (k.to_string(), json!(v))).collect();
    Value::Object(map)
}

/// CSV cell: shortest round-trip form, `nan` for missing values.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
