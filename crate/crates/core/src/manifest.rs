//! Run manifests written next to every command's outputs.

use std::fmt::Write as _;
use std::path::Path;

/// The resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config: Vec<(String, String)>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            config: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Self {
        self.inputs.push(path.as_ref().display().to_string());
        self
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command={}\nversion={}\n", self.command, self.version);
        for i in &self.inputs {
            let _ = writeln!(out, "input={i}");
        }
        for (k, v) in &self.config {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_layout() {
        let m = RunManifest::new("fit").input("a.tsv").set("k", 32).set("seed", 1);
        let text = m.to_text();
        assert!(text.starts_with("command=fit\nversion="));
        assert!(text.contains("input=a.tsv\nk=32\nseed=1\n"));
    }
}
