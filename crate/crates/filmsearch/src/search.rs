//! Threaded design search: `workers` agents share one parameter store and
//! one memo cache, and claim episodes from a common budget.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use thiserror::Error;

use filmsearch_core::a3c::{self, A3cConfig, A3cError, EnvState, Environment, EpisodeSummary, GlobalParams};
use filmsearch_core::design::{
    agent_config, finish_search, DesignError, DesignTask, MaterialEnvironment, MeritCache, SearchOutcome,
};
use filmsearch_core::embedding::EnvironmentMap;
use filmsearch_core::ga::GaConfig;
use filmsearch_core::material::MaterialDb;

use crate::shared::{SharedCache, SharedParams};

/// A failed search together with the episodes that did run.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct SearchFailure {
    #[source]
    pub error: DesignError,
    pub episodes: Vec<EpisodeSummary>,
}

impl From<DesignError> for SearchFailure {
    fn from(error: DesignError) -> Self {
        Self { error, episodes: Vec::new() }
    }
}

/// Trains one shared network with `cfg.workers` threads for `episodes`
/// episodes in total. Episode numbers are handed out in claim order.
pub fn train_threaded<E>(
    env: &E,
    cfg: &A3cConfig,
    episodes: usize,
) -> Result<(GlobalParams, Vec<EpisodeSummary>), (A3cError, Vec<EpisodeSummary>)>
where
    E: Environment + Sync + ?Sized,
{
    cfg.validate(env.layers()).map_err(|e| (e, Vec::new()))?;
    let store = SharedParams::new(cfg.init_params(env.layers()));
    let next = AtomicUsize::new(0);
    let log: Mutex<Vec<EpisodeSummary>> = Mutex::new(Vec::with_capacity(episodes));
    let progress_every = (episodes / 20).max(1);

    let results: Vec<Result<(), A3cError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|id| {
                let (store, next, log) = (&store, &next, &log);
                s.spawn(move || {
                    a3c::run_worker(
                        id,
                        store,
                        env,
                        cfg,
                        || {
                            let e = next.fetch_add(1, Ordering::Relaxed);
                            (e < episodes).then_some(e)
                        },
                        |summary| {
                            if let Some(err) = &summary.error {
                                log::warn!("episode {} (worker {}) failed: {err}", summary.episode, summary.worker_id);
                            }
                            let mut log = log.lock().unwrap_or_else(|p| p.into_inner());
                            log.push(summary);
                            if log.len() % progress_every == 0 {
                                let best = log.iter().map(|e| e.best_merit).fold(f64::INFINITY, f64::min);
                                log::info!("{}/{episodes} episodes, best merit {best:.5}", log.len());
                            }
                        },
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    });
    let mut log = log.into_inner().unwrap_or_else(|p| p.into_inner());
    log.sort_by_key(|e| e.episode);
    match results.into_iter().find_map(Result::err) {
        Some(e) => Err((e, log)),
        None => Ok((store.into_inner(), log)),
    }
}

/// Runs the search with `a3c_cfg.workers` threads. With one worker the run
/// is deterministic for a fixed seed.
pub fn run_search(
    task: &DesignTask,
    a3c_cfg: &A3cConfig,
    ga: &GaConfig,
    map: &EnvironmentMap,
    db: &MaterialDb,
) -> Result<SearchOutcome, SearchFailure> {
    run_search_with_cache(task, a3c_cfg, ga, map, db, &SharedCache::new())
}

/// [`run_search`] memoizing into `cache`, which may already hold entries.
pub fn run_search_with_cache<C: MeritCache + Sync>(
    task: &DesignTask,
    a3c_cfg: &A3cConfig,
    ga: &GaConfig,
    map: &EnvironmentMap,
    db: &MaterialDb,
    cache: &C,
) -> Result<SearchOutcome, SearchFailure> {
    task.validate(db)?;
    map.check_against(db).map_err(DesignError::from)?;
    let env = MaterialEnvironment { db, map, task, ga, cache };
    if task.frozen.len() >= task.layer_count {
        env.evaluate_state(&EnvState::from_cells(vec![[0, 0]; task.layer_count]))?;
        return Ok(finish_search(task, db, cache, Vec::new(), None)?);
    }
    let cfg = agent_config(task, a3c_cfg);
    let (params, episodes) = train_threaded(&env, &cfg, task.epoch_budget)
        .map_err(|(e, episodes)| SearchFailure { error: e.into(), episodes })?;
    finish_search(task, db, cache, episodes.clone(), Some(params)).map_err(|error| SearchFailure { error, episodes })
}
