//! Design tasks, scoring of finished designs and the memoized environment
//! that connects the material agent to the thickness optimizer.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::a3c::{self, A3cConfig, A3cError, EnvState, Environment, EpisodeSummary, Evaluation, GlobalParams, LocalParams};
use crate::embedding::{EmbeddingError, EnvironmentMap};
use crate::ga::{GaConfig, ThicknessError, ThicknessProblem};
use crate::material::{MaterialDb, MaterialError, MaterialId};
use crate::tmm::{self, IncidenceSpec, Medium, Spectrum, TargetSpectrum, TmmError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Tmm(#[from] TmmError),
    #[error(transparent)]
    Thickness(#[from] ThicknessError),
    #[error(transparent)]
    A3c(#[from] A3cError),
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("design has {found} {what}, expected {expected}")]
    LayerCount { what: &'static str, found: usize, expected: usize },
    #[error("invalid task: {0}")]
    BadTask(&'static str),
    #[error("target grid {lo}-{hi} nm lies outside the catalog support {support_lo}-{support_hi} nm")]
    OutsideSupport { lo: f64, hi: f64, support_lo: f64, support_hi: f64 },
    #[error("no state could be evaluated within the budget ({episodes} episodes, {failures} failed)")]
    NoEvaluableState { episodes: usize, failures: usize },
}

impl From<EmbeddingError> for DesignError {
    fn from(e: EmbeddingError) -> Self {
        DesignError::Embedding(alloc::string::ToString::to_string(&e))
    }
}

/// What to design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTask {
    pub layer_count: usize,
    pub target: TargetSpectrum,
    pub incidence: IncidenceSpec,
    pub incident: Medium,
    /// `None` treats the bottom layer's material as a semi-infinite substrate.
    pub substrate: Option<Medium>,
    /// Layers (1-based) pinned to a material; the agent never moves them.
    pub frozen: Vec<(usize, MaterialId)>,
    /// Total number of episodes across all workers.
    pub epoch_budget: usize,
    pub seed: u64,
    /// Band for the reported average absorption.
    pub band_nm: (f64, f64),
}

impl DesignTask {
    /// Five-layer solar absorber in air at normal incidence.
    pub fn solar_absorber(epoch_budget: usize, seed: u64) -> Self {
        Self {
            layer_count: 5,
            target: TargetSpectrum::solar_absorber(),
            incidence: IncidenceSpec::normal(),
            incident: Medium::VACUUM,
            substrate: None,
            frozen: Vec::new(),
            epoch_budget,
            seed,
            band_nm: (250.0, 800.0),
        }
    }

    pub fn validate(&self, db: &MaterialDb) -> Result<(), DesignError> {
        if self.layer_count == 0 {
            return Err(DesignError::BadTask("layer_count must be at least 1"));
        }
        self.target.validate()?;
        self.incidence.validate()?;
        let (support_lo, support_hi) = db.wavelength_support();
        let lo = self.target.wavelengths_nm.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.target.wavelengths_nm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < support_lo || hi > support_hi {
            return Err(DesignError::OutsideSupport { lo, hi, support_lo, support_hi });
        }
        for &(layer, id) in &self.frozen {
            if layer == 0 || layer > self.layer_count {
                return Err(DesignError::BadTask("frozen layer index out of range"));
            }
            db.get(id)?;
        }
        for m in [Some(self.incident), self.substrate].into_iter().flatten() {
            if let Medium::Material(id) = m {
                db.get(id)?;
            }
        }
        Ok(())
    }

    pub fn substrate_for(&self, materials: &[MaterialId]) -> Medium {
        self.substrate.unwrap_or_else(|| Medium::Material(*materials.last().expect("at least one layer")))
    }

    pub fn frozen_layers(&self) -> Vec<usize> {
        self.frozen.iter().map(|&(l, _)| l).collect()
    }

    /// Material tuple for a state: nearest material per layer, then pins.
    pub fn resolve(&self, state: &EnvState, map: &EnvironmentMap) -> Vec<MaterialId> {
        let mut ids: Vec<MaterialId> = state.positions().into_iter().map(|p| map.nearest_material(p)).collect();
        for &(layer, id) in &self.frozen {
            ids[layer - 1] = id;
        }
        ids
    }

    /// Thickness problem for one material tuple.
    pub fn problem(&self, materials: &[MaterialId], db: &MaterialDb) -> Result<ThicknessProblem, DesignError> {
        if materials.len() != self.layer_count {
            return Err(DesignError::LayerCount { what: "materials", found: materials.len(), expected: self.layer_count });
        }
        Ok(ThicknessProblem::new(
            self.incident,
            materials,
            self.substrate_for(materials),
            &self.target,
            &self.incidence,
            db,
        )?)
    }
}

/// A scored design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub materials: Vec<String>,
    pub material_ids: Vec<MaterialId>,
    pub thicknesses_nm: Vec<f64>,
    /// One spectrum per angle of incidence, on the target grid.
    pub spectra: Vec<Spectrum>,
    pub merit: f64,
    /// Mean absorption over `task.band_nm`, averaged over angles.
    pub average_absorption_band: f64,
    /// Best merit after each finished episode.
    pub search_trace: Vec<f64>,
}

/// Scores `materials` at `thicknesses_nm` for `task` without searching.
pub fn score_design(
    materials: &[MaterialId],
    thicknesses_nm: &[f64],
    task: &DesignTask,
    db: &MaterialDb,
) -> Result<DesignResult, DesignError> {
    if thicknesses_nm.len() != materials.len() {
        return Err(DesignError::LayerCount { what: "thicknesses", found: thicknesses_nm.len(), expected: materials.len() });
    }
    let problem = task.problem(materials, db)?;
    let spectra = problem.spectra(thicknesses_nm)?;
    let merit = tmm::merit(&spectra, &task.target)?;
    let (lo, hi) = task.band_nm;
    let bands: Vec<f64> = spectra.iter().filter_map(|s| s.band_average_absorption(lo, hi)).collect();
    if bands.is_empty() {
        return Err(DesignError::BadTask("absorption band contains no target wavelengths"));
    }
    let average_absorption_band = bands.iter().sum::<f64>() / bands.len() as f64;
    let names = materials.iter().map(|&id| db.get(id).map(|r| r.name.clone())).collect::<Result<_, _>>()?;
    Ok(DesignResult {
        materials: names,
        material_ids: materials.to_vec(),
        thicknesses_nm: thicknesses_nm.to_vec(),
        spectra,
        merit,
        average_absorption_band,
        search_trace: Vec::new(),
    })
}

/// [`score_design`] with materials given by name. Unknown names fail with
/// the closest catalog names as suggestions.
pub fn evaluate_design(
    materials: &[&str],
    thicknesses_nm: &[f64],
    task: &DesignTask,
    db: &MaterialDb,
) -> Result<DesignResult, DesignError> {
    let ids = materials.iter().map(|n| db.by_name(n).map(|r| r.id)).collect::<Result<Vec<_>, _>>()?;
    let task = DesignTask { layer_count: ids.len(), ..task.clone() };
    score_design(&ids, thicknesses_nm, &task, db)
}

/// Thickness-optimized result for one material tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub thicknesses_nm: Vec<f64>,
    pub merit: f64,
    pub observation_error: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

/// Memo of thickness optimizations keyed by material tuple.
pub trait MeritCache {
    /// Returns the stored entry, or runs `compute` and stores its result.
    /// The flag is `true` on a hit. Failed computations are not stored.
    fn get_or_compute<E, F>(&self, key: &[MaterialId], compute: F) -> Result<(CacheEntry, bool), E>
    where
        F: FnOnce() -> Result<CacheEntry, E>;

    /// Stores `entry` unless the key is already present.
    fn seed(&self, key: Vec<MaterialId>, entry: CacheEntry);

    fn stats(&self) -> CacheStats;

    /// All stored entries in key order.
    fn entries(&self) -> Vec<(Vec<MaterialId>, CacheEntry)>;
}

/// Single-threaded cache.
#[derive(Debug, Default)]
pub struct LocalCache {
    map: RefCell<BTreeMap<Vec<MaterialId>, CacheEntry>>,
    hits: Cell<usize>,
    misses: Cell<usize>,
}

impl LocalCache {
    pub fn new() -> Self {
        Self::default()
    }
}

impl MeritCache for LocalCache {
    fn get_or_compute<E, F>(&self, key: &[MaterialId], compute: F) -> Result<(CacheEntry, bool), E>
    where
        F: FnOnce() -> Result<CacheEntry, E>,
    {
        if let Some(e) = self.map.borrow().get(key) {
            self.hits.set(self.hits.get() + 1);
            return Ok((e.clone(), true));
        }
        let entry = compute()?;
        self.misses.set(self.misses.get() + 1);
        self.map.borrow_mut().insert(key.to_vec(), entry.clone());
        Ok((entry, false))
    }

    fn seed(&self, key: Vec<MaterialId>, entry: CacheEntry) {
        self.map.borrow_mut().entry(key).or_insert(entry);
    }

    fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.get(), misses: self.misses.get() }
    }

    fn entries(&self) -> Vec<(Vec<MaterialId>, CacheEntry)> {
        self.map.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// GA seed for a tuple: independent of which worker gets there first.
pub fn tuple_seed(base: u64, key: &[MaterialId]) -> u64 {
    key.iter().fold(base ^ 0xcbf2_9ce4_8422_2325, |h, id| {
        (h ^ id.0 as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Runs the GA for one tuple.
pub fn optimize_tuple(
    materials: &[MaterialId],
    task: &DesignTask,
    ga: &GaConfig,
    db: &MaterialDb,
) -> Result<CacheEntry, DesignError> {
    let problem = task.problem(materials, db)?;
    let cfg = GaConfig { seed: tuple_seed(ga.seed, materials), ..ga.clone() };
    let result = problem.optimize(&cfg)?;
    let observation_error = problem.observation_error(result.best.genes())?;
    Ok(CacheEntry { thicknesses_nm: result.best.0, merit: result.best_merit, observation_error })
}

/// Agent-facing environment: positions → materials → memoized GA → merit.
pub struct MaterialEnvironment<'a, C> {
    pub db: &'a MaterialDb,
    pub map: &'a EnvironmentMap,
    pub task: &'a DesignTask,
    pub ga: &'a GaConfig,
    pub cache: &'a C,
}

impl<C: MeritCache> MaterialEnvironment<'_, C> {
    /// Materials, thicknesses and merit of a state.
    pub fn evaluate_state(&self, state: &EnvState) -> Result<(Vec<MaterialId>, CacheEntry, bool), DesignError> {
        let ids = self.task.resolve(state, self.map);
        let (entry, hit) = self.cache.get_or_compute(&ids, || optimize_tuple(&ids, self.task, self.ga, self.db))?;
        Ok((ids, entry, hit))
    }
}

impl<C: MeritCache> Environment for MaterialEnvironment<'_, C> {
    type Error = DesignError;

    fn layers(&self) -> usize {
        self.task.layer_count
    }

    fn evaluate(&self, state: &EnvState) -> Result<Evaluation, DesignError> {
        let (_, entry, cache_hit) = self.evaluate_state(state)?;
        Ok(Evaluation { merit: entry.merit, observation_error: entry.observation_error, cache_hit })
    }
}

/// Agent settings implied by a task: its seed and pinned layers.
pub fn agent_config(task: &DesignTask, a3c: &A3cConfig) -> A3cConfig {
    A3cConfig { seed: task.seed, frozen_layers: task.frozen_layers(), ..a3c.clone() }
}

/// Running minimum of the episodes' best merits, in episode order.
pub fn search_trace(episodes: &[EpisodeSummary]) -> Vec<f64> {
    let mut sorted: Vec<&EpisodeSummary> = episodes.iter().collect();
    sorted.sort_by_key(|e| e.episode);
    let mut best = f64::INFINITY;
    sorted
        .into_iter()
        .map(|e| {
            best = best.min(e.best_merit);
            best
        })
        .collect()
}

/// Best cache entry; ties go to the smallest key.
pub fn best_entry<C: MeritCache>(cache: &C) -> Option<(Vec<MaterialId>, CacheEntry)> {
    cache.entries().into_iter().fold(None, |best, (k, e)| match best {
        Some((_, ref b)) if b.merit <= e.merit => best,
        _ => Some((k, e)),
    })
}

/// Everything a finished search produced.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub result: DesignResult,
    pub episodes: Vec<EpisodeSummary>,
    pub cache: CacheStats,
    /// Number of distinct material tuples optimized.
    pub distinct_tuples: usize,
    pub params: Option<GlobalParams>,
}

/// Assembles the final result from the cache and the episode log.
pub fn finish_search<C: MeritCache>(
    task: &DesignTask,
    db: &MaterialDb,
    cache: &C,
    mut episodes: Vec<EpisodeSummary>,
    params: Option<GlobalParams>,
) -> Result<SearchOutcome, DesignError> {
    episodes.sort_by_key(|e| e.episode);
    let Some((ids, entry)) = best_entry(cache) else {
        let failures = episodes.iter().filter(|e| e.error.is_some()).count();
        return Err(DesignError::NoEvaluableState { episodes: episodes.len(), failures });
    };
    let mut result = score_design(&ids, &entry.thicknesses_nm, task, db)?;
    result.search_trace = search_trace(&episodes);
    if result.search_trace.is_empty() {
        result.search_trace.push(entry.merit);
    }
    let distinct_tuples = cache.entries().len();
    Ok(SearchOutcome { result, episodes, cache: cache.stats(), distinct_tuples, params })
}

/// Single-threaded search: one worker, deterministic for a fixed seed.
pub fn run_search_local(
    task: &DesignTask,
    a3c_cfg: &A3cConfig,
    ga: &GaConfig,
    map: &EnvironmentMap,
    db: &MaterialDb,
) -> Result<SearchOutcome, DesignError> {
    task.validate(db)?;
    map.check_against(db)?;
    let cache = LocalCache::new();
    let env = MaterialEnvironment { db, map, task, ga, cache: &cache };
    if task.frozen.len() >= task.layer_count {
        let state = EnvState::from_cells(vec![[0, 0]; task.layer_count]);
        env.evaluate_state(&state)?;
        return finish_search(task, db, &cache, Vec::new(), None);
    }
    let cfg = agent_config(task, a3c_cfg);
    cfg.validate(task.layer_count)?;
    let store = LocalParams::new(cfg.init_params(task.layer_count));
    let mut next = 0usize;
    let mut log = Vec::new();
    a3c::run_worker(
        0,
        &store,
        &env,
        &cfg,
        || {
            (next < task.epoch_budget).then(|| {
                next += 1;
                next - 1
            })
        },
        |s| log.push(s),
    )?;
    finish_search(task, db, &cache, log, Some(store.into_inner()))
}
