//! TOML run configuration: catalog and map locations plus embedding, task,
//! agent and GA parameters. Every section is optional.
//!
//! ```toml
//! catalog = "data/catalog"
//! map = "out/map.json"
//!
//! [task]
//! layers = 5
//! band_nm = [250.0, 800.0]
//! epoch_budget = 1000
//! frozen = [{ layer = 5, material = "Cu" }]
//!
//! [ga]
//! population_size = 100
//! generations = 500
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::a3c::A3cConfig;
use filmsearch_core::design::DesignTask;
use filmsearch_core::embedding::{EncoderConfig, TsneConfig};
use filmsearch_core::ga::GaConfig;
use filmsearch_core::material::{MaterialDb, MaterialError};
use filmsearch_core::tmm::{IncidenceSpec, Medium, Polarization, TargetSpectrum};
use filmsearch_core::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("task: {0}")]
    Task(String),
    #[error("task: {0}")]
    Material(#[from] MaterialError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory of dispersion files. Relative paths are taken from the
    /// config file's directory.
    pub catalog: PathBuf,
    /// Environment map written by `embed` and read by `design`.
    pub map: PathBuf,
    pub embedding: EmbeddingSection,
    pub task: TaskSection,
    pub a3c: A3cConfig,
    pub ga: GaConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            catalog: PathBuf::from("data/catalog"),
            map: PathBuf::from("map.json"),
            embedding: EmbeddingSection::default(),
            task: TaskSection::default(),
            a3c: A3cConfig::default(),
            ga: GaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub encoder: EncoderConfig,
    pub tsne: TsneConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrozenLayer {
    /// 1-based, counted from the incident side.
    pub layer: usize,
    pub material: String,
}

/// Band-absorber design task. The target is full absorption inside
/// `band_nm` and none elsewhere on the `grid_nm` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub layers: usize,
    /// `[start, end, step]` of the target grid.
    pub grid_nm: [f64; 3],
    pub band_nm: [f64; 2],
    pub angles_deg: Vec<f64>,
    pub polarization: Polarization,
    /// `[n, k]` of the incident medium.
    pub incident_index: [f64; 2],
    /// Substrate material name; the bottom layer's material when absent.
    pub substrate: Option<String>,
    pub frozen: Vec<FrozenLayer>,
    pub epoch_budget: usize,
    pub seed: u64,
    /// Merit at or below which an episode counts as solved. When absent,
    /// the merit of missing every in-band point by 0.05.
    pub success_threshold: Option<f64>,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            layers: 5,
            grid_nm: [250.0, 2500.0, 5.0],
            band_nm: [250.0, 800.0],
            angles_deg: vec![0.0],
            polarization: Polarization::Unpolarized,
            incident_index: [1.0, 0.0],
            substrate: None,
            frozen: Vec::new(),
            epoch_budget: 1000,
            seed: 0,
            success_threshold: None,
        }
    }
}

impl TaskSection {
    pub fn target(&self) -> Result<TargetSpectrum, ConfigError> {
        let [start, end, step] = self.grid_nm;
        let [lo, hi] = self.band_nm;
        if !(step > 0.0 && end >= start && hi >= lo) {
            return Err(ConfigError::Task("grid_nm must be [start, end, step] with step > 0 and band_nm ordered".into()));
        }
        Ok(TargetSpectrum::band_absorber(start, end, step, lo, hi))
    }

    pub fn success_threshold(&self) -> Result<f64, ConfigError> {
        match self.success_threshold {
            Some(t) => Ok(t),
            None => {
                let in_band = self.target()?.target.iter().filter(|&&t| t > 0.0).count();
                Ok(in_band as f64 * 0.05 * 0.05)
            }
        }
    }

    /// Resolves material names against `db`.
    pub fn build(&self, db: &MaterialDb) -> Result<DesignTask, ConfigError> {
        let substrate = match &self.substrate {
            Some(name) => Some(Medium::Material(db.by_name(name)?.id)),
            None => None,
        };
        let frozen = self
            .frozen
            .iter()
            .map(|f| db.by_name(&f.material).map(|r| (f.layer, r.id)))
            .collect::<Result<_, _>>()?;
        let [n, k] = self.incident_index;
        Ok(DesignTask {
            layer_count: self.layers,
            target: self.target()?,
            incidence: IncidenceSpec { angles_deg: self.angles_deg.clone(), polarization: self.polarization },
            incident: Medium::Index(Complex64::new(n, k)),
            substrate,
            frozen,
            epoch_budget: self.epoch_budget,
            seed: self.seed,
            band_nm: (self.band_nm[0], self.band_nm[1]),
        })
    }
}

impl RunConfig {
    /// Parses `text`; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|source| ConfigError::Toml { path: origin.to_path_buf(), source })?;
        cfg.catalog = base.join(&cfg.catalog);
        cfg.map = base.join(&cfg.map);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")), path)
    }

    /// Replaces every seed in the configuration.
    pub fn set_seed(&mut self, seed: u64) {
        self.embedding.encoder.seed = seed;
        self.embedding.tsne.seed = seed;
        self.task.seed = seed;
        self.a3c.seed = seed;
        self.ga.seed = seed;
    }

    /// Agent settings with the task's success threshold applied.
    pub fn agent(&self) -> Result<A3cConfig, ConfigError> {
        let mut a3c = self.a3c.clone();
        a3c.reward.success_merit_threshold = self.task.success_threshold()?;
        Ok(a3c)
    }
}
