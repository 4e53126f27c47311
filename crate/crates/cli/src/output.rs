//! All-or-nothing output: files are rendered in memory, written under
//! temporary names and renamed into place only once every write succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(String, String)>,
}

impl Staged {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn commit(self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let pid = std::process::id();
        let mut temps = Vec::new();
        for (name, contents) in &self.files {
            let tmp = dir.join(format!(".{name}.{pid}.tmp"));
            if let Err(e) = fs::write(&tmp, contents) {
                let _ = fs::remove_file(&tmp);
                cleanup(&temps);
                return Err(e).with_context(|| format!("writing {}", tmp.display()));
            }
            temps.push((tmp, dir.join(name)));
        }
        let mut done = Vec::new();
        for (tmp, target) in &temps {
            if let Err(e) = fs::rename(tmp, target) {
                cleanup(&temps);
                return Err(e).with_context(|| format!("moving output to {}", target.display()));
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}

fn cleanup(temps: &[(PathBuf, PathBuf)]) {
    for (tmp, _) in temps {
        let _ = fs::remove_file(tmp);
    }
}

/// Formats a probability-like number for terminal tables.
pub fn fixed(x: f64) -> String {
    format!("{x:.6}")
}
