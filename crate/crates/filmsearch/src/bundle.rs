//! Result bundle of a design run.
//!
//! | file | contents |
//! |---|---|
//! | `summary.json` | materials, thicknesses, merit, band absorption, run statistics |
//! | `spectrum.csv` | `lambda_nm,angle_deg,A,R,T` |
//! | `trace.csv` | `episode,best_merit` |
//! | `training_log.csv` | one row per episode |
//! | `checkpoint.json` | final agent parameters (when an agent ran) |
//!
//! Nothing time-dependent is written, so equal runs give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::a3c::EpisodeSummary;
use filmsearch_core::design::{DesignResult, DesignTask, SearchOutcome};
use filmsearch_core::tmm::Spectrum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{self, CheckpointError};

pub const SUMMARY: &str = "summary.json";
pub const SPECTRUM: &str = "spectrum.csv";
pub const TRACE: &str = "trace.csv";
pub const TRAINING_LOG: &str = "training_log.csv";
pub const CHECKPOINT: &str = "checkpoint.json";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub materials: Vec<String>,
    pub thicknesses_nm: Vec<f64>,
    pub merit: f64,
    pub band_nm: (f64, f64),
    pub average_absorption_band: f64,
    pub seed: u64,
    pub workers: usize,
    pub episodes: usize,
    pub distinct_tuples: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub failed_episodes: usize,
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), BundleError> {
    let csv_err = |source| BundleError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| BundleError::Io { path: path.to_path_buf(), source })
}

pub fn write_spectrum_csv(path: &Path, spectra: &[Spectrum]) -> Result<(), BundleError> {
    let rows = spectra.iter().flat_map(|s| {
        (0..s.wavelengths_nm.len()).map(move |i| {
            [s.wavelengths_nm[i], s.angle_deg, s.absorption[i], s.reflection[i], s.transmission[i]]
                .iter()
                .map(f64::to_string)
                .collect()
        })
    });
    write_rows(path, &["lambda_nm", "angle_deg", "A", "R", "T"], rows)
}

pub fn write_trace_csv(path: &Path, trace: &[f64]) -> Result<(), BundleError> {
    let rows = trace.iter().enumerate().map(|(i, m)| vec![i.to_string(), m.to_string()]);
    write_rows(path, &["episode", "best_merit"], rows)
}

/// Episodes in episode order; `best_merit_so_far` is the running minimum
/// over the run.
pub fn write_training_log(path: &Path, episodes: &[EpisodeSummary]) -> Result<(), BundleError> {
    let mut sorted: Vec<&EpisodeSummary> = episodes.iter().collect();
    sorted.sort_by_key(|e| e.episode);
    let mut best = f64::INFINITY;
    let rows = sorted.into_iter().map(|e| {
        best = best.min(e.best_merit);
        vec![
            e.episode.to_string(),
            e.worker_id.to_string(),
            e.steps.to_string(),
            e.terminal_reason.as_str().to_string(),
            best.to_string(),
            e.cache_hits.to_string(),
            e.cache_misses.to_string(),
        ]
    });
    write_rows(
        path,
        &["episode", "worker_id", "steps", "terminal_reason", "best_merit_so_far", "cache_hits", "cache_misses"],
        rows,
    )
}

pub fn summary(outcome: &SearchOutcome, task: &DesignTask, workers: usize) -> Summary {
    let r: &DesignResult = &outcome.result;
    Summary {
        materials: r.materials.clone(),
        thicknesses_nm: r.thicknesses_nm.clone(),
        merit: r.merit,
        band_nm: task.band_nm,
        average_absorption_band: r.average_absorption_band,
        seed: task.seed,
        workers,
        episodes: outcome.episodes.len(),
        distinct_tuples: outcome.distinct_tuples,
        cache_hits: outcome.cache.hits,
        cache_misses: outcome.cache.misses,
        failed_episodes: outcome.episodes.iter().filter(|e| e.error.is_some()).count(),
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<(), BundleError> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| BundleError::Io { path: path.to_path_buf(), source })
}

/// Writes the full bundle into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, outcome: &SearchOutcome, task: &DesignTask, workers: usize) -> Result<(), BundleError> {
    fs::create_dir_all(dir).map_err(|source| BundleError::Io { path: dir.to_path_buf(), source })?;
    write_summary(&dir.join(SUMMARY), &summary(outcome, task, workers))?;
    write_spectrum_csv(&dir.join(SPECTRUM), &outcome.result.spectra)?;
    write_trace_csv(&dir.join(TRACE), &outcome.result.search_trace)?;
    write_training_log(&dir.join(TRAINING_LOG), &outcome.episodes)?;
    if let Some(params) = &outcome.params {
        checkpoint::save(params, &dir.join(CHECKPOINT))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv_layout() {
        let s = Spectrum {
            angle_deg: 0.0,
            wavelengths_nm: vec![400.0, 450.5],
            absorption: vec![0.25, 0.5],
            reflection: vec![0.75, 0.5],
            transmission: vec![0.0, 0.0],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_spectrum_csv(&path, &[s]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "lambda_nm,angle_deg,A,R,T\n400,0,0.25,0.75,0\n450.5,0,0.5,0.5,0\n");
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = [0.1 + 0.2, 1.0 / 3.0, 1e-300];
        write_trace_csv(&path, &trace).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(back, trace);
    }
}
