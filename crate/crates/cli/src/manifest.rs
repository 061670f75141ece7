//! The on-disk experiment description: which view files to load, their
//! shapes and formats, the optional ground-truth labels, and the cluster
//! count. Paths are resolved relative to the manifest file so a dataset
//! directory can be moved wholesale.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::errors::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Mvdm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViewEntry {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
    pub format: MatrixFormat,
}

/// Unknown JSON keys are ignored on read so older binaries accept newer
/// manifests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub views: Vec<ViewEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<String>,
    pub k: usize,
}

impl Manifest {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.views.is_empty() {
            return Err(CliError::Io("manifest lists no views".into()));
        }
        let n = self.views[0].cols;
        for (i, v) in self.views.iter().enumerate() {
            if v.cols != n {
                return Err(CliError::Io(format!(
                    "manifest views disagree on sample count: view 0 has {n} cols, \
                     view {i} has {}",
                    v.cols
                )));
            }
        }
        Ok(())
    }
}

/// Loads and validates a manifest, returning it with the directory against
/// which its relative paths resolve.
pub fn load(path: &Path) -> Result<(Manifest, PathBuf), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let man: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::io(path, format!("bad manifest: {e}")))?;
    man.validate()?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((man, base))
}
