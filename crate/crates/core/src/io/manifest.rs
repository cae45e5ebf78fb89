//! Dataset manifest (JSON).
//!
//! ```json
//! {"activities": [{"name": "tea", "k": 5, "videos": [
//!   {"id": "tea_000", "feature_path": "features/tea_000.vfea",
//!    "gt_path": "gt/tea_000.txt", "frame_count": 480}]}]}
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_text, write_bytes};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: String,
    pub feature_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_path: Option<PathBuf>,
    pub frame_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityEntry {
    pub name: String,
    pub k: usize,
    pub videos: Vec<VideoEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub activities: Vec<ActivityEntry>,
}

impl Manifest {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Parses, resolves relative paths and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m = Manifest::from_json(&read_text(path)?, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for act in &mut m.activities {
            for v in &mut act.videos {
                v.feature_path = base.join(&v.feature_path);
                v.gt_path = v.gt_path.as_ref().map(|g| base.join(g));
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_json().as_bytes())
    }

    /// Unique ids, `k ≥ 2`, and every referenced file readable.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for act in &self.activities {
            if !names.insert(&act.name) {
                return Err(Error::Ingestion(format!("duplicate activity `{}`", act.name)));
            }
            if act.k < 2 {
                return Err(Error::Config(format!(
                    "activity `{}` needs k >= 2, got {}",
                    act.name, act.k
                )));
            }
            if act.videos.is_empty() {
                return Err(Error::Ingestion(format!("activity `{}` has no videos", act.name)));
            }
            for v in &act.videos {
                if !ids.insert(&v.id) {
                    return Err(Error::Ingestion(format!("duplicate video id `{}`", v.id)));
                }
                for p in std::iter::once(&v.feature_path).chain(v.gt_path.as_ref()) {
                    std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
                }
            }
        }
        Ok(())
    }

    pub fn activity(&self, name: &str) -> Result<&ActivityEntry> {
        self.activities
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::Config(format!("manifest has no activity `{name}`")))
    }
}
