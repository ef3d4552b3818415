//! Frozen reference values in a flat `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Goldens {
    path: PathBuf,
    values: BTreeMap<String, f64>,
    dirty: bool,
}

impl Goldens {
    /// Empty set bound to `path`; nothing is read.
    pub fn fresh(path: impl Into<PathBuf>) -> Self {
        Goldens {
            path: path.into(),
            values: BTreeMap::new(),
            dirty: false,
        }
    }

    /// Reads `path`; `Ok(None)` if it does not exist.
    pub fn load(path: impl Into<PathBuf>) -> CliResult<Option<Self>> {
        let path = path.into();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::Failure(format!("cannot read {}: {e}", path.display()))),
        };
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .rsplit_once('=')
                .and_then(|(k, v)| v.trim().parse::<f64>().ok().map(|v| (k.trim().to_string(), v)));
            let Some((k, v)) = parsed else {
                return Err(CliError::Failure(format!(
                    "{}:{}: malformed golden line",
                    path.display(),
                    i + 1
                )));
            };
            values.insert(k, v);
        }
        Ok(Some(Goldens {
            path,
            values,
            dirty: false,
        }))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
        self.dirty = true;
    }

    pub fn save(&self) -> CliResult<()> {
        if !self.dirty {
            return Ok(());
        }
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut text = String::new();
        for (k, v) in &self.values {
            text.push_str(&format!("{k} = {v:?}\n"));
        }
        std::fs::write(&self.path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.golden");
        assert!(Goldens::load(&path).unwrap().is_none());
        let mut g = Goldens::fresh(&path);
        g.set("a.rho=2", 0.1 + 0.2);
        g.set("c", 3.0);
        g.save().unwrap();
        let back = Goldens::load(&path).unwrap().unwrap();
        assert_eq!(back.get("a.rho=2"), Some(0.1 + 0.2));
        assert_eq!(back.get("c"), Some(3.0));
        std::fs::write(&path, "oops\n").unwrap();
        assert!(Goldens::load(&path).is_err());
    }
}
