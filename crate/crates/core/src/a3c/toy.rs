//! Synthetic two-cluster environment with a known optimum, for checking that
//! the agent learns.
//!
//! The map holds two tight clusters of ten materials each on top of a
//! regular background lattice. The two-layer
//! design is solved when layer 1 resolves to cluster A and layer 2 to
//! cluster B; otherwise each layer contributes the distance from its
//! position to its target cluster centre, so every step toward the target
//! improves the merit.

use alloc::format;
use alloc::vec::Vec;
use core::convert::Infallible;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvState, Environment, Evaluation};
use crate::embedding::{EnvPoint, EnvironmentMap, MapEntry, Provenance};
use crate::material::{Category, MaterialId};

pub const CLUSTER_A: EnvPoint = EnvPoint { x: 0.3, y: 0.7 };
pub const CLUSTER_B: EnvPoint = EnvPoint { x: 0.7, y: 0.3 };
const CLUSTER_SIZE: usize = 10;
const CLUSTER_RADIUS: f64 = 0.08;
/// Background lattice points per axis.
const LATTICE: usize = 20;

#[derive(Debug, Clone)]
pub struct ToyEnv {
    map: EnvironmentMap,
}

impl ToyEnv {
    /// Material ids `0..10` form cluster A, `10..20` cluster B.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(2 * CLUSTER_SIZE + LATTICE * LATTICE);
        for centre in [CLUSTER_A, CLUSTER_B] {
            for _ in 0..CLUSTER_SIZE {
                let r = CLUSTER_RADIUS * rng.random::<f64>().sqrt();
                let t = core::f64::consts::TAU * rng.random::<f64>();
                points.push((centre.x + r * t.cos(), centre.y + r * t.sin(), Category::Metal));
            }
        }
        for i in 0..LATTICE {
            for j in 0..LATTICE {
                let p = EnvPoint { x: (i as f64 + 0.5) / LATTICE as f64, y: (j as f64 + 0.5) / LATTICE as f64 };
                let clear = |c: EnvPoint| p.distance_squared(c).sqrt() > 2.0 * CLUSTER_RADIUS;
                if clear(CLUSTER_A) && clear(CLUSTER_B) {
                    points.push((p.x, p.y, Category::Other));
                }
            }
        }
        let entries = points
            .into_iter()
            .enumerate()
            .map(|(i, (x, y, category))| MapEntry {
                id: MaterialId(i),
                name: format!("toy{i}"),
                category,
                point: EnvPoint { x, y },
            })
            .collect();
        let map = EnvironmentMap::new(entries, Provenance { note: "synthetic two-cluster map".into(), ..Provenance::default() })
            .expect("toy map is valid");
        Self { map }
    }

    pub fn map(&self) -> &EnvironmentMap {
        &self.map
    }

    pub fn in_cluster(id: MaterialId, cluster: usize) -> bool {
        id.0 / CLUSTER_SIZE == cluster && id.0 < 2 * CLUSTER_SIZE
    }

    pub fn merit(&self, state: &EnvState) -> f64 {
        state
            .positions()
            .into_iter()
            .zip([CLUSTER_A, CLUSTER_B])
            .enumerate()
            .map(|(layer, (p, centre))| {
                let id = self.map.nearest_material(p);
                if Self::in_cluster(id, layer) {
                    0.0
                } else {
                    p.distance_squared(centre).sqrt()
                }
            })
            .sum()
    }
}

impl Environment for ToyEnv {
    type Error = Infallible;

    fn layers(&self) -> usize {
        2
    }

    fn evaluate(&self, state: &EnvState) -> Result<Evaluation, Infallible> {
        let merit = self.merit(state);
        Ok(Evaluation { merit, observation_error: merit, cache_hit: false })
    }
}
