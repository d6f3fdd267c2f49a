//! The work behind each CLI subcommand. Each returns the text to print.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::design::{evaluate_design, search_trace, DesignTask};
use filmsearch_core::embedding::{build_environment_map, EmbeddingError, EnvironmentMap};
use filmsearch_core::material::{Category, MaterialDb};
use thiserror::Error;

use crate::bundle::{self, BundleError};
use crate::catalog::{self, CatalogError};
use crate::config::{ConfigError, RunConfig};
use crate::mapfile::{self, MapFileError};
use crate::plot::{self, PlotError};
use crate::search::run_search;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    MapFile(#[from] MapFileError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("{0}")]
    Input(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("search failed: {0}")]
    Search(String),
    #[error(transparent)]
    Output(#[from] BundleError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CommandError {
    /// 2 bad input, 3 training failure, 4 search failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Catalog(_)
            | CommandError::Config(_)
            | CommandError::MapFile(_)
            | CommandError::Plot(_)
            | CommandError::Input(_) => 2,
            CommandError::Training(_) => 3,
            CommandError::Search(_) => 4,
            CommandError::Output(_) | CommandError::Io { .. } => 1,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CommandError> {
    fs::write(path, contents).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

fn create_dir(path: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(path).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

/// `N materials, support [a, b] nm` followed by per-category counts.
pub fn ingest(dir: &Path) -> Result<String, CommandError> {
    let db = catalog::load_database(dir)?;
    let (lo, hi) = db.wavelength_support();
    let mut out = format!("{} materials, support [{lo}, {hi}] nm\n", db.len());
    for c in Category::ALL {
        let n = db.records().iter().filter(|r| r.category == c).count();
        if n > 0 {
            let _ = writeln!(out, "  {c}: {n}");
        }
    }
    Ok(out)
}

fn embedding_error(e: EmbeddingError) -> CommandError {
    match e {
        EmbeddingError::Diverged { .. } | EmbeddingError::Degenerate | EmbeddingError::Collapsed => {
            CommandError::Training(e.to_string())
        }
        _ => CommandError::Input(e.to_string()),
    }
}

pub struct EmbedOutput {
    pub map: EnvironmentMap,
    pub map_path: PathBuf,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
    pub report: String,
}

/// Trains the encoder, embeds the catalog and writes the map, its CSV
/// export and a scatter plot. Outputs go to `out` when given, otherwise
/// next to the configured map path.
pub fn embed(cfg: &RunConfig, out: Option<&Path>) -> Result<EmbedOutput, CommandError> {
    let db = catalog::load_database(&cfg.catalog)?;
    let map_path = match out {
        Some(dir) => {
            create_dir(dir)?;
            dir.join("map.json")
        }
        None => cfg.map.clone(),
    };
    log::info!("training encoder on {} materials", db.len());
    let (map, trained) =
        build_environment_map(&db, &cfg.embedding.encoder, &cfg.embedding.tsne).map_err(embedding_error)?;
    if let Some(parent) = map_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let csv_path = map_path.with_extension("csv");
    let svg_path = map_path.with_extension("svg");
    mapfile::save_map(&map, &map_path)?;
    mapfile::write_csv(&map, &csv_path)?;
    write_file(&svg_path, &plot::map_svg(&map))?;
    let report = format!(
        "{} materials embedded\nreconstruction loss {:.6}\ncategory silhouette {:.4}\nwrote {}, {}, {}\n",
        map.len(),
        trained.final_reconstruction_loss,
        map.category_silhouette(),
        map_path.display(),
        csv_path.display(),
        svg_path.display()
    );
    Ok(EmbedOutput { map, map_path, csv_path, svg_path, report })
}

fn design_table(out: &mut String, materials: &[String], thicknesses: &[f64]) {
    for (i, (m, t)) in materials.iter().zip(thicknesses).enumerate() {
        let _ = writeln!(out, "  layer {}: {m:<12} {t:8.2} nm", i + 1);
    }
}

fn load_task(cfg: &RunConfig, db: &MaterialDb) -> Result<DesignTask, CommandError> {
    let task = cfg.task.build(db)?;
    task.validate(db).map_err(|e| CommandError::Input(e.to_string()))?;
    Ok(task)
}

/// Runs the search and writes the bundle into `out`. On failure the
/// episode log and trace that were produced are still written.
pub fn design(cfg: &RunConfig, out: &Path) -> Result<String, CommandError> {
    let db = catalog::load_database(&cfg.catalog)?;
    let map = mapfile::load_map(&cfg.map)?;
    map.check_against(&db).map_err(|e| CommandError::Input(format!("{}: {e}", cfg.map.display())))?;
    let task = load_task(cfg, &db)?;
    let a3c = cfg.agent()?;
    log::info!(
        "searching {} layers with {} workers for {} episodes",
        task.layer_count,
        a3c.workers,
        task.epoch_budget
    );
    create_dir(out)?;
    let outcome = match run_search(&task, &a3c, &cfg.ga, &map, &db) {
        Ok(o) => o,
        Err(failure) => {
            bundle::write_training_log(&out.join(bundle::TRAINING_LOG), &failure.episodes)?;
            bundle::write_trace_csv(&out.join(bundle::TRACE), &search_trace(&failure.episodes))?;
            return Err(CommandError::Search(failure.error.to_string()));
        }
    };
    bundle::write_bundle(out, &outcome, &task, a3c.workers)?;
    let r = &outcome.result;
    let mut text = String::from("best design:\n");
    design_table(&mut text, &r.materials, &r.thicknesses_nm);
    let (lo, hi) = task.band_nm;
    let _ = writeln!(text, "merit {:.6}", r.merit);
    let _ = writeln!(text, "average absorption {lo}-{hi} nm: {:.4}", r.average_absorption_band);
    let _ = writeln!(
        text,
        "{} episodes, {} tuples optimized, {} cache hits",
        outcome.episodes.len(),
        outcome.distinct_tuples,
        outcome.cache.hits
    );
    let _ = writeln!(text, "bundle written to {}", out.display());
    Ok(text)
}

/// Scores a fixed design and writes `spectrum.csv` into `out`.
pub fn evaluate(cfg: &RunConfig, materials: &[String], thicknesses: &[f64], out: &Path) -> Result<String, CommandError> {
    if materials.len() != thicknesses.len() {
        return Err(CommandError::Input(format!(
            "{} materials but {} thicknesses",
            materials.len(),
            thicknesses.len()
        )));
    }
    let db = catalog::load_database(&cfg.catalog)?;
    let task = cfg.task.build(&db)?;
    let names: Vec<&str> = materials.iter().map(String::as_str).collect();
    let r = evaluate_design(&names, thicknesses, &task, &db).map_err(|e| CommandError::Input(e.to_string()))?;
    create_dir(out)?;
    let csv = out.join(bundle::SPECTRUM);
    bundle::write_spectrum_csv(&csv, &r.spectra)?;
    let mut text = String::from("design:\n");
    design_table(&mut text, &r.materials, &r.thicknesses_nm);
    let (lo, hi) = task.band_nm;
    let _ = writeln!(text, "merit {:.6}", r.merit);
    let _ = writeln!(text, "average absorption {lo}-{hi} nm: {:.4}", r.average_absorption_band);
    let _ = writeln!(text, "spectrum written to {}", csv.display());
    Ok(text)
}

pub fn plot(bundle_dir: &Path) -> Result<String, CommandError> {
    let written = plot::render_bundle(bundle_dir)?;
    Ok(written.iter().map(|p| format!("wrote {}\n", p.display())).collect())
}
