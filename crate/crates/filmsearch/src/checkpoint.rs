//! Versioned JSON checkpoint of the global actor-critic parameters and
//! optimizer state.

use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::a3c::GlobalParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed checkpoint: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: unsupported checkpoint version {found}", path.display())]
    Version { path: PathBuf, found: u32 },
    #[error("{}: checkpoint holds non-finite parameters", path.display())]
    NonFinite { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub params: GlobalParams,
}

pub fn to_json(params: &GlobalParams) -> String {
    let ck = Checkpoint { format_version: CHECKPOINT_FORMAT_VERSION, params: params.clone() };
    let mut s = serde_json::to_string(&ck).expect("parameters serialize");
    s.push('\n');
    s
}

pub fn save(params: &GlobalParams, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, to_json(params)).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })
}

pub fn load(path: &Path) -> Result<GlobalParams, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
    let ck: Checkpoint =
        serde_json::from_str(&text).map_err(|source| CheckpointError::Format { path: path.to_path_buf(), source })?;
    if ck.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(CheckpointError::Version { path: path.to_path_buf(), found: ck.format_version });
    }
    if !ck.params.net.is_finite() {
        return Err(CheckpointError::NonFinite { path: path.to_path_buf() });
    }
    Ok(ck.params)
}
