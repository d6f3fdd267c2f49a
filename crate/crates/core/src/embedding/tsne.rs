//! Exact t-SNE with per-point perplexity calibration.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EmbeddingError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    /// Requested perplexity; capped at `(N - 1) / 3` for small inputs.
    pub perplexity: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub learning_rate: f64,
    pub init_sigma: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: 50.0,
            init_sigma: 1e-4,
            seed: 0,
        }
    }
}

/// Coordinates plus the KL objective sampled every 50 iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub points: Vec<[f64; 2]>,
    /// `(iteration, KL(P || Q))`, always measured against the unexaggerated P.
    pub kl_history: Vec<(usize, f64)>,
    pub perplexity: f64,
}

fn squared_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = s;
            d[j * n + i] = s;
        }
    }
    d
}

/// Conditional affinities of row `i` for precision `beta`; returns entropy (nats).
fn row_affinities(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    // Shift by the smallest off-diagonal distance so exp() never underflows
    // the whole row.
    let min = dist.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, (&d, o)) in dist.iter().zip(out.iter_mut()).enumerate() {
        *o = if j == i { 0.0 } else { (-(d - min) * beta).exp() };
        sum += *o;
    }
    let mut weighted = 0.0;
    for (&d, o) in dist.iter().zip(out.iter_mut()) {
        *o /= sum;
        weighted += *o * (d - min);
    }
    sum.ln() + beta * weighted
}

/// Symmetrized joint affinities `P`, row-major `n × n`.
pub fn joint_affinities(latents: &[Vec<f64>], perplexity: f64) -> Result<Vec<f64>, EmbeddingError> {
    let n = latents.len();
    let dist = squared_distances(latents);
    if dist.iter().all(|&d| d == 0.0) {
        return Err(EmbeddingError::Degenerate);
    }
    let target = perplexity.ln();
    let mut cond = vec![0.0; n * n];
    for i in 0..n {
        let row = &dist[i * n..(i + 1) * n];
        let out = &mut cond[i * n..(i + 1) * n];
        let (mut lo, mut hi, mut beta) = (0.0_f64, f64::INFINITY, 1.0_f64);
        let scale = row.iter().copied().fold(0.0, f64::max);
        if scale > 0.0 {
            beta = 1.0 / scale;
        }
        for _ in 0..200 {
            let h = row_affinities(row, i, beta, out);
            if (h - target).abs() < 1e-5 {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        row_affinities(row, i, beta, out);
    }
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
            }
        }
    }
    Ok(p)
}

fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = 1.0 / (1.0 + dist2(y[i], y[j]));
                num[i * n + j] = q;
                z += q;
            }
        }
    }
    let mut kl = 0.0;
    for idx in 0..n * n {
        if p[idx] > 0.0 && num[idx] > 0.0 {
            kl += p[idx] * (p[idx] / (num[idx] / z).max(1e-300)).ln();
        }
    }
    kl
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
}

/// Embeds `latents` into the plane.
pub fn embed_tsne(latents: &[Vec<f64>], cfg: &TsneConfig) -> Result<TsneOutput, EmbeddingError> {
    let n = latents.len();
    if !(cfg.perplexity >= 2.0) {
        return Err(EmbeddingError::BadConfig("perplexity must be at least 2"));
    }
    if cfg.iterations == 0 || !(cfg.learning_rate > 0.0) {
        return Err(EmbeddingError::BadConfig("t-SNE needs iterations and a positive learning rate"));
    }
    let perplexity = cfg.perplexity.min((n as f64 - 1.0) / 3.0);
    if perplexity < 2.0 {
        return Err(EmbeddingError::TooFewMaterials { found: n, needed: 7 });
    }
    let p = joint_affinities(latents, perplexity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            [a * cfg.init_sigma, b * cfg.init_sigma]
        })
        .collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0_f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut kl_history = Vec::new();

    for iter in 0..cfg.iterations {
        let exaggerate = iter < cfg.exaggeration_iterations;
        let factor = if exaggerate { cfg.exaggeration } else { 1.0 };
        let momentum = if exaggerate { 0.5 } else { 0.8 };
        let mut z = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let q = 1.0 / (1.0 + dist2(y[i], y[j]));
                num[i * n + j] = q;
                num[j * n + i] = q;
                z += 2.0 * q;
            }
        }
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = (factor * p[i * n + j] - num[i * n + j] / z) * num[i * n + j];
                g[0] += 4.0 * w * (y[i][0] - y[j][0]);
                g[1] += 4.0 * w * (y[i][1] - y[j][1]);
            }
            for d in 0..2 {
                let same_sign = (g[d] > 0.0) == (velocity[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                gains[i][d] = gains[i][d].max(0.01);
                velocity[i][d] = momentum * velocity[i][d] - cfg.learning_rate * gains[i][d] * g[d];
            }
        }
        let mut mean = [0.0; 2];
        for (yi, v) in y.iter_mut().zip(&velocity) {
            yi[0] += v[0];
            yi[1] += v[1];
            mean[0] += yi[0] / n as f64;
            mean[1] += yi[1] / n as f64;
        }
        for yi in &mut y {
            yi[0] -= mean[0];
            yi[1] -= mean[1];
        }
        if (iter + 1) % 50 == 0 || iter + 1 == cfg.iterations {
            kl_history.push((iter + 1, kl_divergence(&p, &y)));
        }
    }
    if y.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
        return Err(EmbeddingError::Diverged { epoch: cfg.iterations });
    }
    Ok(TsneOutput { points: y, kl_history, perplexity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centres = [[0.0, 0.0, 0.0, 0.0], [10.0, 0.0, 5.0, 0.0], [0.0, -10.0, 0.0, 8.0]];
        let mut x = Vec::new();
        let mut labels = Vec::new();
        for (label, c) in centres.iter().enumerate() {
            for _ in 0..20 {
                x.push(c.iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect());
                labels.push(label);
            }
        }
        (x, labels)
    }

    #[test]
    fn separated_clusters_stay_separated() {
        let (x, labels) = clusters(3);
        let out = embed_tsne(&x, &TsneConfig { seed: 1, ..TsneConfig::default() }).unwrap();
        assert_eq!(out.perplexity, 30.0_f64.min(59.0 / 3.0));
        let n = x.len();
        let mut agree = 0;
        for i in 0..n {
            let mut d: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (dist2(out.points[i], out.points[j]), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            agree += d[..5].iter().filter(|&&(_, j)| labels[j] == labels[i]).count();
        }
        assert!(agree as f64 / (5 * n) as f64 >= 0.9);
    }

    #[test]
    fn objective_settles_after_exaggeration() {
        let (x, _) = clusters(9);
        let out = embed_tsne(&x, &TsneConfig::default()).unwrap();
        let late: Vec<f64> = out.kl_history.iter().filter(|(it, _)| *it > 250).map(|(_, kl)| *kl).collect();
        for w in late.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{late:?}");
        }
    }

    #[test]
    fn deterministic_and_identical_input_rejected() {
        let (x, _) = clusters(4);
        let cfg = TsneConfig { iterations: 120, ..TsneConfig::default() };
        assert_eq!(embed_tsne(&x, &cfg).unwrap(), embed_tsne(&x, &cfg).unwrap());
        let same = vec![vec![1.0, 2.0]; 30];
        assert!(matches!(embed_tsne(&same, &cfg), Err(EmbeddingError::Degenerate)));
    }

    #[test]
    fn calibrated_rows_hit_perplexity() {
        let (x, _) = clusters(5);
        let n = x.len();
        let dist = squared_distances(&x);
        let p = joint_affinities(&x, 10.0).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        // Recompute one conditional row and check its perplexity.
        let mut row = vec![0.0; n];
        let (mut lo, mut hi) = (1e-6_f64, 1e3_f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            let h = row_affinities(&dist[..n], 0, mid, &mut row);
            if h > 10.0_f64.ln() { lo = mid } else { hi = mid }
        }
        let h = row_affinities(&dist[..n], 0, lo, &mut row);
        assert!((h.exp() - 10.0).abs() < 1e-3);
    }
}
