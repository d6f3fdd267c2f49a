//! Environment map files: JSON with a provenance block, plus a CSV export.

use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::embedding::{EmbeddingError, EnvPoint, EnvironmentMap, MapEntry, Provenance};
use filmsearch_core::material::{Category, MaterialId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MapFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed map file: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: unsupported map format version {found}", path.display())]
    Version { path: PathBuf, found: u32 },
    #[error("{}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        #[source]
        source: EmbeddingError,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct Row {
    id: usize,
    name: String,
    category: Category,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    version: u32,
    provenance: Provenance,
    materials: Vec<Row>,
}

pub fn to_json(map: &EnvironmentMap) -> String {
    let file = MapFile {
        version: MAP_FORMAT_VERSION,
        provenance: map.provenance().clone(),
        materials: map
            .entries()
            .iter()
            .map(|e| Row { id: e.id.0, name: e.name.clone(), category: e.category, x: e.point.x, y: e.point.y })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("map serializes");
    text.push('\n');
    text
}

pub fn save_map(map: &EnvironmentMap, path: &Path) -> Result<(), MapFileError> {
    fs::write(path, to_json(map)).map_err(|source| MapFileError::Io { path: path.to_path_buf(), source })
}

/// Reads and validates a map file.
pub fn load_map(path: &Path) -> Result<EnvironmentMap, MapFileError> {
    let text = fs::read_to_string(path).map_err(|source| MapFileError::Io { path: path.to_path_buf(), source })?;
    let file: MapFile =
        serde_json::from_str(&text).map_err(|source| MapFileError::Format { path: path.to_path_buf(), source })?;
    if file.version != MAP_FORMAT_VERSION {
        return Err(MapFileError::Version { path: path.to_path_buf(), found: file.version });
    }
    let entries = file
        .materials
        .into_iter()
        .map(|r| MapEntry { id: MaterialId(r.id), name: r.name, category: r.category, point: EnvPoint { x: r.x, y: r.y } })
        .collect();
    EnvironmentMap::new(entries, file.provenance).map_err(|source| MapFileError::Invalid { path: path.to_path_buf(), source })
}

/// `id,name,category,x,y` export for plotting.
pub fn write_csv(map: &EnvironmentMap, path: &Path) -> Result<(), MapFileError> {
    let csv_err = |source| MapFileError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for e in map.entries() {
        w.serialize(Row { id: e.id.0, name: e.name.clone(), category: e.category, x: e.point.x, y: e.point.y })
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| MapFileError::Io { path: path.to_path_buf(), source })
}
