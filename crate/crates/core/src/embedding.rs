//! Learned 2D environment space for materials.
//!
//! Each material's (n, k) spectra are compressed by a variational
//! autoencoder, the latent means are laid out in the plane by t-SNE and the
//! result is scaled onto the unit square. Any point in the square resolves to
//! its nearest material.

mod kdtree;
pub mod tsne;
pub mod vae;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::{Category, MaterialDb, MaterialError, MaterialId};
pub use kdtree::KdTree;
pub use tsne::{embed_tsne, TsneConfig, TsneOutput};
pub use vae::{train_encoder, EncoderConfig, TrainedEncoder};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("need at least {needed} materials, found {found}")]
    TooFewMaterials { found: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
    #[error("training diverged at step {epoch}")]
    Diverged { epoch: usize },
    #[error("all latent codes are identical; perplexity calibration cannot converge")]
    Degenerate,
    #[error("point ({x}, {y}) lies outside the unit square")]
    OutsideUnitSquare { x: f64, y: f64 },
    #[error("map needs at least two distinct points")]
    Collapsed,
    #[error("map has {found} points but the database has {expected} materials")]
    CountMismatch { found: usize, expected: usize },
    #[error("map entry {position} has id {found}, expected {expected}")]
    IdMismatch { position: usize, found: usize, expected: usize },
    #[error("map entry {id} is named `{found}` but the database has `{expected}`")]
    NameMismatch { id: usize, found: String, expected: String },
}

/// Latent mean of one material.
pub type LatentCode = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvPoint {
    pub x: f64,
    pub y: f64,
}

impl EnvPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, EmbeddingError> {
        if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
            Ok(Self { x, y })
        } else {
            Err(EmbeddingError::OutsideUnitSquare { x, y })
        }
    }

    pub fn distance_squared(self, other: EnvPoint) -> f64 {
        (self.x - other.x) * (self.x - other.x) + (self.y - other.y) * (self.y - other.y)
    }
}

/// Per-axis min-max scaling onto `[0, 1]`. An axis with zero range maps to 0.5.
pub fn normalize_to_unit_square(raw: &[[f64; 2]]) -> Vec<EnvPoint> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in raw {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let scale = |v: f64, d: usize| {
        let range = hi[d] - lo[d];
        if range > 0.0 {
            ((v - lo[d]) / range).clamp(0.0, 1.0)
        } else {
            0.5
        }
    };
    raw.iter().map(|p| EnvPoint { x: scale(p[0], 0), y: scale(p[1], 1) }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub id: MaterialId,
    pub name: String,
    pub category: Category,
    pub point: EnvPoint,
}

/// How a map was produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub encoder: Option<EncoderConfig>,
    pub tsne: Option<TsneConfig>,
    pub final_reconstruction_loss: Option<f64>,
    /// Free-form description, e.g. the encoder family.
    pub note: String,
}

/// Immutable material map with a nearest-neighbour index.
#[derive(Debug, Clone)]
pub struct EnvironmentMap {
    entries: Vec<MapEntry>,
    provenance: Provenance,
    index: KdTree,
}

impl PartialEq for EnvironmentMap {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.provenance == other.provenance
    }
}

impl EnvironmentMap {
    /// Entries must carry ids `0..N` in order.
    pub fn new(entries: Vec<MapEntry>, provenance: Provenance) -> Result<Self, EmbeddingError> {
        for (position, e) in entries.iter().enumerate() {
            if e.id.0 != position {
                return Err(EmbeddingError::IdMismatch { position, found: e.id.0, expected: position });
            }
            EnvPoint::new(e.point.x, e.point.y)?;
        }
        let first = entries.first().map(|e| e.point);
        if !entries.iter().any(|e| Some(e.point) != first) {
            return Err(EmbeddingError::Collapsed);
        }
        let index = KdTree::build(&entries.iter().map(|e| e.point).collect::<Vec<_>>());
        Ok(Self { entries, provenance, index })
    }

    /// Checks that the map covers exactly the materials of `db`.
    pub fn check_against(&self, db: &MaterialDb) -> Result<(), EmbeddingError> {
        if self.entries.len() != db.len() {
            return Err(EmbeddingError::CountMismatch { found: self.entries.len(), expected: db.len() });
        }
        for (e, r) in self.entries.iter().zip(db.records()) {
            if e.name != r.name {
                return Err(EmbeddingError::NameMismatch { id: e.id.0, found: e.name.clone(), expected: r.name.clone() });
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[MapEntry] {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn point(&self, id: MaterialId) -> Option<EnvPoint> {
        self.entries.get(id.0).map(|e| e.point)
    }

    /// Closest material to `p`; ties go to the lowest id.
    pub fn nearest_material(&self, p: EnvPoint) -> MaterialId {
        MaterialId(self.index.nearest(p))
    }

    /// Exhaustive O(N) scan with the same tie rule, kept as an oracle.
    pub fn nearest_material_linear(&self, p: EnvPoint) -> MaterialId {
        let mut best = (f64::INFINITY, 0);
        for (i, e) in self.entries.iter().enumerate() {
            let d = e.point.distance_squared(p);
            if d < best.0 {
                best = (d, i);
            }
        }
        MaterialId(best.1)
    }

    /// Mean silhouette over the macro groups of the entries' categories.
    pub fn category_silhouette(&self) -> f64 {
        let points: Vec<[f64; 2]> = self.entries.iter().map(|e| [e.point.x, e.point.y]).collect();
        let labels: Vec<Option<usize>> = self.entries.iter().map(|e| e.category.macro_group()).collect();
        silhouette(&points, &labels)
    }
}

/// Mean silhouette score of labelled points. Unlabelled points are ignored;
/// a point alone in its cluster scores 0.
pub fn silhouette(points: &[[f64; 2]], labels: &[Option<usize>]) -> f64 {
    let clusters = labels.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, (&p, li)) in points.iter().zip(labels).enumerate() {
        let Some(li) = *li else { continue };
        let mut sums = alloc::vec![0.0; clusters];
        let mut sizes = alloc::vec![0usize; clusters];
        for (j, (&q, lj)) in points.iter().zip(labels).enumerate() {
            if let (Some(lj), true) = (*lj, i != j) {
                sums[lj] += dist(p, q);
                sizes[lj] += 1;
            }
        }
        count += 1;
        if sizes[li] == 0 {
            continue;
        }
        let a = sums[li] / sizes[li] as f64;
        let b = (0..clusters)
            .filter(|&c| c != li && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() && a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Full pipeline: encoder, t-SNE, normalization.
pub fn build_environment_map(
    db: &MaterialDb,
    encoder: &EncoderConfig,
    tsne: &TsneConfig,
) -> Result<(EnvironmentMap, TrainedEncoder), EmbeddingError> {
    let trained = train_encoder(db, encoder)?;
    let raw = embed_tsne(&trained.latents, tsne)?;
    let points = normalize_to_unit_square(&raw.points);
    let entries = db
        .records()
        .iter()
        .zip(points)
        .map(|(r, point)| MapEntry { id: r.id, name: r.name.clone(), category: r.category, point })
        .collect();
    let provenance = Provenance {
        encoder: Some(encoder.clone()),
        tsne: Some(TsneConfig { perplexity: raw.perplexity, ..tsne.clone() }),
        final_reconstruction_loss: Some(trained.final_reconstruction_loss),
        note: String::from("fully-connected VAE over standardized [n, ln(1+k)] spectra; exact t-SNE"),
    };
    Ok((EnvironmentMap::new(entries, provenance)?, trained))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn map_of(points: &[(f64, f64)]) -> EnvironmentMap {
        let entries = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| MapEntry {
                id: MaterialId(i),
                name: format!("m{i}"),
                category: Category::Other,
                point: EnvPoint { x, y },
            })
            .collect();
        EnvironmentMap::new(entries, Provenance::default()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let p = normalize_to_unit_square(&[[0.0, 0.0], [10.0, 20.0]]);
        assert_eq!(p, vec![EnvPoint { x: 0.0, y: 0.0 }, EnvPoint { x: 1.0, y: 1.0 }]);
        let p = normalize_to_unit_square(&[[5.0, 0.0], [5.0, 1.0]]);
        assert_eq!((p[0].x, p[1].x), (0.5, 0.5));
        assert_eq!((p[0].y, p[1].y), (0.0, 1.0));
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let mut pts = vec![(0.9, 0.9); 8];
        pts[3] = (0.4, 0.5);
        pts[7] = (0.6, 0.5);
        let map = map_of(&pts);
        assert_eq!(map.nearest_material(EnvPoint { x: 0.5, y: 0.5 }), MaterialId(3));
        assert_eq!(map.nearest_material(EnvPoint { x: 0.6, y: 0.5 }), MaterialId(7));
        // Duplicate points: the lower id wins.
        assert_eq!(map.nearest_material(EnvPoint { x: 0.9, y: 0.9 }), MaterialId(0));
    }

    #[test]
    fn map_invariants() {
        let entries = vec![
            MapEntry { id: MaterialId(0), name: "a".into(), category: Category::Metal, point: EnvPoint { x: 0.2, y: 0.2 } },
            MapEntry { id: MaterialId(1), name: "b".into(), category: Category::Metal, point: EnvPoint { x: 0.2, y: 0.2 } },
        ];
        assert!(matches!(EnvironmentMap::new(entries.clone(), Provenance::default()), Err(EmbeddingError::Collapsed)));
        let mut bad = entries.clone();
        bad[1].point.x = 1.5;
        assert!(EnvironmentMap::new(bad, Provenance::default()).is_err());
        let mut bad = entries;
        bad[1].id = MaterialId(4);
        assert!(EnvironmentMap::new(bad, Provenance::default()).is_err());
    }

    #[test]
    fn silhouette_of_separated_groups() {
        let pts = [[0.0, 0.0], [0.0, 0.1], [1.0, 1.0], [1.0, 0.9]];
        let labels = [Some(0), Some(0), Some(1), Some(1)];
        assert!(silhouette(&pts, &labels) > 0.8);
        let mixed = [Some(0), Some(1), Some(0), Some(1)];
        assert!(silhouette(&pts, &mixed) < 0.0);
    }

    proptest! {
        #[test]
        fn kd_tree_matches_scan(
            pts in prop::collection::vec((0u8..=20, 0u8..=20), 2..60),
            queries in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..40),
        ) {
            // Coarse lattice coordinates make exact ties common.
            let coords: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| (a as f64 / 20.0, b as f64 / 20.0)).collect();
            prop_assume!(coords.iter().any(|&c| c != coords[0]));
            let map = map_of(&coords);
            for (x, y) in queries.into_iter().chain(coords.iter().copied()) {
                let p = EnvPoint { x, y };
                prop_assert_eq!(map.nearest_material(p), map.nearest_material_linear(p));
            }
        }

        #[test]
        fn normalize_is_idempotent(raw in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..30)) {
            let raw: Vec<[f64; 2]> = raw.into_iter().map(|(a, b)| [a, b]).collect();
            let once = normalize_to_unit_square(&raw);
            for p in &once {
                prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
            }
            let again = normalize_to_unit_square(&once.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>());
            for (a, b) in once.iter().zip(&again) {
                prop_assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
            }
        }
    }
}
