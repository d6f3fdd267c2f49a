//! File formats, threaded search and command implementations on top of
//! `filmsearch-core`.

pub mod bundle;
pub mod catalog;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod mapfile;
pub mod plot;
pub mod search;
pub mod shared;

pub use filmsearch_core as core;
