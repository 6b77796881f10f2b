//! Run manifest: sorted `key=value` lines in `<out>/manifest.txt`.
//!
//! Keys by prefix:
//! - `config.*`    effective configuration of the latest command
//! - `input.*`     source file names and digests
//! - `artifact.<relative path>`  SHA-256 of every file the pipeline wrote
//! - `report.<stage>.<model>`    relative path of each metrics report
//! - `status.<stage>.<model>`    `ok`, `not-converged` or `error: ...`
//! - `timing.<stage>_ms`         wall-clock duration (not deterministic)

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::digest::file_sha256;

pub const MANIFEST_FILE: &str = "manifest.txt";
const HEADER: &str = "# hqids-manifest";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    root: PathBuf,
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    /// Loads `<root>/manifest.txt`, or starts empty when it does not exist.
    pub fn load_or_new(root: &Path) -> io::Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let mut entries = BTreeMap::new();
        match fs::read_to_string(&path) {
            Ok(text) => {
                for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
                    if let Some((k, v)) = line.split_once('=') {
                        entries.insert(k.to_string(), v.to_string());
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(RunManifest {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Drops every key starting with `prefix`.
    pub fn clear_prefix(&mut self, prefix: &str) {
        self.entries.retain(|k, _| !k.starts_with(prefix));
    }

    /// Hashes `<root>/<rel>` and records it under `artifact.<rel>`.
    pub fn record_artifact(&mut self, rel: &str) -> io::Result<String> {
        let digest = file_sha256(&self.root.join(rel))?;
        self.set(format!("artifact.{rel}"), digest.clone());
        Ok(digest)
    }

    /// `(relative path, digest)` for every recorded artifact.
    pub fn artifacts(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|(k, v)| {
            k.strip_prefix("artifact.").map(|rel| (rel, v.as_str()))
        })
    }

    /// Everything except timings, the part that must match across identical runs.
    pub fn deterministic_view(&self) -> BTreeMap<&str, &str> {
        self.entries
            .iter()
            .filter(|(k, _)| !k.starts_with("timing."))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    pub fn save(&self) -> io::Result<()> {
        let mut text = String::from(HEADER);
        text.push('\n');
        for (k, v) in &self.entries {
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        fs::create_dir_all(&self.root)?;
        fs::write(self.root.join(MANIFEST_FILE), text)
    }

    /// Re-hashes every artifact; returns the paths that are missing or differ.
    pub fn verify(&self) -> Vec<String> {
        self.artifacts()
            .filter_map(|(rel, want)| match file_sha256(&self.root.join(rel)) {
                Ok(got) if got == want => None,
                Ok(_) => Some(format!("{rel}: digest mismatch")),
                Err(e) => Some(format!("{rel}: {e}")),
            })
            .collect()
    }
}
