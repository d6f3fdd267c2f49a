//! Real-coded genetic algorithm for layer thicknesses.
//!
//! Truncation selection, single-point crossover, per-gene uniform-reset
//! mutation and elitism. Merits are minimized (fitness is `-merit`).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::{MaterialDb, MaterialId};
use crate::tmm::{self, IncidenceSpec, Medium, PreparedStack, Spectrum, TargetSpectrum, TmmError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("{name} = {value} must lie in [0, 1]")]
    BadRate { name: &'static str, value: f64 },
    #[error("population size must be at least 4, got {0}")]
    PopulationTooSmall(usize),
    #[error("elitism keeps no chromosome (elitism_rate * population_size < 1)")]
    NoElites,
    #[error("thickness bounds ({0}, {1}) must satisfy 0 < lower < upper")]
    BadBounds(f64, f64),
    #[error("chromosome needs at least one gene")]
    NoGenes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub selection_rate: f64,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elitism_rate: f64,
    pub thickness_bounds_nm: (f64, f64),
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 500,
            selection_rate: 0.3,
            mutation_rate: 0.1,
            crossover_rate: 0.5,
            elitism_rate: 0.1,
            thickness_bounds_nm: (10.0, 200.0),
            seed: 0,
        }
    }
}

/// `ceil(rate * n)` without floating-point spill (0.3 * 10 is 3, not 4).
fn fraction_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64) - 1e-9).ceil().max(0.0) as usize
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        for (name, value) in [
            ("selection_rate", self.selection_rate),
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
            ("elitism_rate", self.elitism_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GaError::BadRate { name, value });
            }
        }
        if self.population_size < 4 {
            return Err(GaError::PopulationTooSmall(self.population_size));
        }
        if self.elite_count() < 1 {
            return Err(GaError::NoElites);
        }
        let (lo, hi) = self.thickness_bounds_nm;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(GaError::BadBounds(lo, hi));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        fraction_count(self.elitism_rate, self.population_size).min(self.population_size)
    }

    pub fn pool_size(&self) -> usize {
        fraction_count(self.selection_rate, self.population_size).clamp(1, self.population_size)
    }
}

/// Layer thicknesses in nanometres, topmost layer first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome(pub Vec<f64>);

impl Chromosome {
    pub fn random<R: Rng + ?Sized>(genes: usize, bounds: (f64, f64), rng: &mut R) -> Self {
        Chromosome((0..genes).map(|_| uniform(bounds, rng)).collect())
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn within(&self, bounds: (f64, f64)) -> bool {
        self.0.iter().all(|g| *g >= bounds.0 && *g <= bounds.1)
    }

    /// Cache key: genes rounded to 0.01 nm.
    fn key(&self) -> Vec<i64> {
        self.0.iter().map(|g| (g * 100.0).round() as i64).collect()
    }
}

fn uniform<R: Rng + ?Sized>(bounds: (f64, f64), rng: &mut R) -> f64 {
    let (lo, hi) = bounds;
    (lo + rng.random::<f64>() * (hi - lo)).clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Chromosome,
    pub best_merit: f64,
    /// Best merit after initialization and after each generation
    /// (`generations + 1` entries, non-increasing).
    pub history: Vec<f64>,
    /// Mean merit of each population, aligned with `history`.
    pub mean_history: Vec<f64>,
    pub evaluations: usize,
    pub cache_hits: usize,
}

/// Indices of the parent pool: the best `pool_size` individuals by merit,
/// best first; ties keep population order.
pub fn select(merits: &[f64], cfg: &GaConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..merits.len()).collect();
    order.sort_by(|&a, &b| merits[a].total_cmp(&merits[b]));
    order.truncate(cfg.pool_size().min(merits.len()));
    order
}

/// Children of a single-point crossover after `cut` genes.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    assert_eq!(a.len(), b.len(), "parents must have equal length");
    let mut x = a.0[..cut].to_vec();
    x.extend_from_slice(&b.0[cut..]);
    let mut y = b.0[..cut].to_vec();
    y.extend_from_slice(&a.0[cut..]);
    (Chromosome(x), Chromosome(y))
}

/// Single-point crossover at a uniform cut in `1..len`; single-gene parents
/// are copied.
pub fn crossover<R: Rng + ?Sized>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> (Chromosome, Chromosome) {
    if a.len() < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.random_range(1..a.len());
    crossover_at(a, b, cut)
}

/// Each gene is redrawn uniformly within the bounds with probability
/// `mutation_rate`.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, cfg: &GaConfig, rng: &mut R) -> Chromosome {
    Chromosome(
        c.0.iter()
            .map(|&g| {
                if rng.random::<f64>() < cfg.mutation_rate {
                    uniform(cfg.thickness_bounds_nm, rng)
                } else {
                    g
                }
            })
            .collect(),
    )
}

/// Elites copied unchanged, then children bred from the selection pool
/// (crossover with probability `crossover_rate`, then mutation) until the
/// population is full again.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Chromosome],
    merits: &[f64],
    cfg: &GaConfig,
    rng: &mut R,
) -> Vec<Chromosome> {
    let size = population.len();
    let mut ranked: Vec<usize> = (0..size).collect();
    ranked.sort_by(|&a, &b| merits[a].total_cmp(&merits[b]));
    let mut next: Vec<Chromosome> = ranked
        .iter()
        .take(cfg.elite_count().min(size))
        .map(|&i| population[i].clone())
        .collect();
    let pool = select(merits, cfg);
    while next.len() < size {
        let a = &population[pool[rng.random_range(0..pool.len())]];
        let b = &population[pool[rng.random_range(0..pool.len())]];
        let (x, y) = if rng.random::<f64>() < cfg.crossover_rate {
            crossover(a, b, rng)
        } else {
            (a.clone(), b.clone())
        };
        next.push(mutate(&x, cfg, rng));
        if next.len() < size {
            next.push(mutate(&y, cfg, rng));
        }
    }
    next
}

/// Minimizes `objective` over `genes` thicknesses. Evaluations of chromosomes
/// that agree to 0.01 nm are cached for the run.
pub fn optimize<E, F>(genes: usize, cfg: &GaConfig, mut objective: F) -> Result<GaResult, E>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
    E: From<GaError>,
{
    cfg.validate()?;
    if genes == 0 {
        return Err(GaError::NoGenes.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut evaluations = 0;
    let mut cache_hits = 0;
    let mut evaluate = |pop: &[Chromosome]| -> Result<Vec<f64>, E> {
        pop.iter()
            .map(|c| {
                let key = c.key();
                if let Some(&m) = cache.get(&key) {
                    cache_hits += 1;
                    return Ok(m);
                }
                evaluations += 1;
                let m = objective(c.genes())?;
                cache.insert(key, m);
                Ok(m)
            })
            .collect()
    };

    let mut population: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| Chromosome::random(genes, cfg.thickness_bounds_nm, &mut rng))
        .collect();
    let mut merits = evaluate(&population)?;
    let mut best_idx = argmin(&merits);
    let mut best = population[best_idx].clone();
    let mut best_merit = merits[best_idx];
    let mut history = alloc::vec![best_merit];
    let mut mean_history = alloc::vec![mean(&merits)];

    for _ in 0..cfg.generations {
        population = next_generation(&population, &merits, cfg, &mut rng);
        merits = evaluate(&population)?;
        best_idx = argmin(&merits);
        if merits[best_idx] < best_merit {
            best_merit = merits[best_idx];
            best = population[best_idx].clone();
        }
        history.push(best_merit);
        mean_history.push(mean(&merits));
    }
    Ok(GaResult { best, best_merit, history, mean_history, evaluations, cache_hits })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.total_cmp(&values[best]).is_lt() {
            best = i;
        }
    }
    best
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThicknessError {
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Tmm(#[from] TmmError),
}

/// A fixed material sequence scored against a target; the thickness vector
/// is the only free variable.
#[derive(Debug, Clone)]
pub struct ThicknessProblem {
    stack: PreparedStack,
    target: TargetSpectrum,
    incidence: IncidenceSpec,
}

impl ThicknessProblem {
    pub fn new(
        incident: Medium,
        materials: &[MaterialId],
        substrate: Medium,
        target: &TargetSpectrum,
        incidence: &IncidenceSpec,
        db: &MaterialDb,
    ) -> Result<Self, TmmError> {
        target.validate()?;
        incidence.validate()?;
        let stack = PreparedStack::new(incident, materials, substrate, &target.wavelengths_nm, db)?;
        Ok(Self { stack, target: target.clone(), incidence: incidence.clone() })
    }

    pub fn layer_count(&self) -> usize {
        self.stack.layer_count()
    }

    pub fn spectra(&self, thicknesses_nm: &[f64]) -> Result<Vec<Spectrum>, TmmError> {
        self.stack.spectra(thicknesses_nm, &self.incidence)
    }

    pub fn merit(&self, thicknesses_nm: &[f64]) -> Result<f64, TmmError> {
        tmm::merit(&self.spectra(thicknesses_nm)?, &self.target)
    }

    pub fn observation_error(&self, thicknesses_nm: &[f64]) -> Result<f64, TmmError> {
        tmm::observation_error(&self.spectra(thicknesses_nm)?, &self.target)
    }

    pub fn optimize(&self, cfg: &GaConfig) -> Result<GaResult, ThicknessError> {
        optimize(self.layer_count(), cfg, |d| self.merit(d).map_err(ThicknessError::from))
    }
}

/// Runs the GA for a fixed material sequence.
pub fn optimize_thickness(
    materials: &[MaterialId],
    incident: Medium,
    substrate: Medium,
    target: &TargetSpectrum,
    incidence: &IncidenceSpec,
    cfg: &GaConfig,
    db: &MaterialDb,
) -> Result<GaResult, ThicknessError> {
    ThicknessProblem::new(incident, materials, substrate, target, incidence, db)?.optimize(cfg)
}
