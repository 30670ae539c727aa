//! Run manifests: a flat `key=value` sidecar next to every CSV.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};

use super::settings::Settings;

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: Settings,
    pub master_seed: u64,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl RunManifest {
    /// Manifest text. Parameter lines come first in key order; the
    /// bookkeeping lines (ignored when the file is read back as a config)
    /// follow.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.params.iter() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("command={}\n", self.command));
        out.push_str(&format!("master_seed={}\n", self.master_seed));
        out.push_str(&format!("tool_version={}\n", self.tool_version));
        out.push_str(&format!("started_at={}\n", self.started_at.to_rfc3339_opts(SecondsFormat::Millis, true)));
        out.push_str(&format!("finished_at={}\n", self.finished_at.to_rfc3339_opts(SecondsFormat::Millis, true)));
        out
    }

    pub fn write_next_to(&self, output: &Path) -> std::io::Result<PathBuf> {
        let path = sidecar_path(output);
        std::fs::write(&path, self.render())?;
        Ok(path)
    }
}

/// `results.csv` -> `results.csv.manifest`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}
