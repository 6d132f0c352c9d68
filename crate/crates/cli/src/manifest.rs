use std::fs;
use std::path::{Path, PathBuf};

use retrocav::shapes::ShapeSpec;
use serde::{Deserialize, Serialize};

use crate::cli::{Command, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce the files of one run. Holds no timestamps
/// or host details, so replaying it rewrites the same bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub command: Command,
    /// The resolved shape, so that a replay does not depend on the spec file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved_shape: Option<ShapeSpec>,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Collects the files written into an output directory.
pub struct OutputDir {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: Option<PathBuf>) -> std::io::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    pub fn is_set(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` if an output directory was given.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), bytes)?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn finish(self, command: &Command, resolved_shape: Option<ShapeSpec>) -> std::io::Result<()> {
        let Some(d) = &self.dir else {
            return Ok(());
        };
        let manifest = RunManifest {
            tool: "retrocav".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
            command: command.clone(),
            resolved_shape,
            outputs: self.written,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(d.join(MANIFEST_FILE), text)
    }
}
