//! Staged output: nothing touches disk until a suite has finished.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use euler_geom::{ScalarField, VectorField};

enum Item {
    Text(String),
    Scalar(ScalarField),
    Vector(VectorField),
}

#[derive(Default)]
pub struct Outputs {
    items: Vec<(PathBuf, Item)>,
}

impl Outputs {
    pub fn text(&mut self, rel: impl Into<PathBuf>, body: String) {
        self.items.push((rel.into(), Item::Text(body)));
    }

    pub fn json<T: serde::Serialize>(&mut self, rel: impl Into<PathBuf>, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(rel, body);
        Ok(())
    }

    pub fn scalar(&mut self, rel: impl Into<PathBuf>, f: ScalarField) {
        self.items.push((rel.into(), Item::Scalar(f)));
    }

    pub fn vector(&mut self, rel: impl Into<PathBuf>, f: VectorField) {
        self.items.push((rel.into(), Item::Vector(f)));
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.items.len());
        for (rel, item) in &self.items {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            match item {
                Item::Text(body) => fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?,
                Item::Scalar(f) => f.write_csv(&path)?,
                Item::Vector(f) => f.write_csv(&path)?,
            }
            written.push(path);
        }
        Ok(written)
    }
}
