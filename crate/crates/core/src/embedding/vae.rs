//! Fully-connected variational autoencoder over resampled (n, k) spectra.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::material::MaterialDb;
use crate::nn::{Activation, Adam, AdamConfig, Mlp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    /// Wavelengths (nm) each material is resampled on.
    pub input_grid: Vec<f64>,
    pub latent_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub kl_weight: f64,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            input_grid: uniform_grid(250.0, 2500.0, 121),
            latent_dim: 20,
            hidden_dims: vec![128, 64],
            epochs: 1000,
            batch_size: 16,
            learning_rate: 1e-3,
            kl_weight: 1e-5,
            seed: 0,
        }
    }
}

/// `count` evenly spaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    end
                } else {
                    start + (end - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |why: &'static str| Err(EmbeddingError::BadConfig(why));
        if self.latent_dim < 2 {
            return bad("latent_dim must be at least 2");
        }
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if self.input_grid.is_empty() {
            return bad("input_grid is empty");
        }
        if self.hidden_dims.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.kl_weight >= 0.0 && self.kl_weight.is_finite()) {
            return bad("kl_weight must be non-negative");
        }
        Ok(())
    }
}

/// Per-feature standardization. `k` is passed through `ln(1 + k)` first so
/// metals (k ~ 10) do not swamp the loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows[0].len();
        let count = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / count;
            }
        }
        let mut scale = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m) / count;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-16 { s.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Raw feature vector `[n(λ)…, ln(1 + k(λ))…]` for every material.
pub fn raw_features(db: &MaterialDb, grid: &[f64]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
    db.records()
        .iter()
        .map(|r| {
            let (n, k) = r.resample(grid)?;
            let mut row = n;
            row.extend(k.iter().map(|v| v.ln_1p()));
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vae {
    latent_dim: usize,
    encoder: Mlp,
    decoder: Mlp,
    kl_weight: f64,
}

/// Loss terms for one batch, averaged over samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaeLoss {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

impl Vae {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, cfg: &EncoderConfig, rng: &mut R) -> Self {
        let mut enc_widths = vec![input_dim];
        enc_widths.extend(&cfg.hidden_dims);
        enc_widths.push(2 * cfg.latent_dim);
        let mut dec_widths = vec![cfg.latent_dim];
        dec_widths.extend(cfg.hidden_dims.iter().rev());
        dec_widths.push(input_dim);
        Self {
            latent_dim: cfg.latent_dim,
            encoder: Mlp::new(&enc_widths, Activation::Relu, Activation::Identity, 0.1, rng),
            decoder: Mlp::new(&dec_widths, Activation::Relu, Activation::Identity, 1.0, rng),
            kl_weight: cfg.kl_weight,
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    pub fn encoder_mut(&mut self) -> &mut Mlp {
        &mut self.encoder
    }

    pub fn decoder_mut(&mut self) -> &mut Mlp {
        &mut self.decoder
    }

    /// Posterior mean and log-variance.
    pub fn encode(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let out = self.encoder.forward(x);
        let (mu, logvar) = out.split_at(self.latent_dim);
        (mu.to_vec(), logvar.to_vec())
    }

    pub fn decode(&self, z: &[f64]) -> Vec<f64> {
        self.decoder.forward(z)
    }

    /// Mean squared reconstruction error of `x` decoded from its posterior mean.
    pub fn reconstruction_error(&self, x: &[f64]) -> f64 {
        let (mu, _) = self.encode(x);
        mse(&self.decode(&mu), x)
    }

    /// Batch loss and its gradients with the reparameterization noise fixed
    /// to `noise` (one vector of `latent_dim` standard normals per sample).
    pub fn loss_and_gradients(&self, batch: &[&[f64]], noise: &[Vec<f64>]) -> (VaeLoss, Vec<f64>, Vec<f64>) {
        let mut g_enc = vec![0.0; self.encoder.param_count()];
        let mut g_dec = vec![0.0; self.decoder.param_count()];
        let count = batch.len() as f64;
        let (mut recon_sum, mut kl_sum) = (0.0, 0.0);
        for (x, eps) in batch.iter().zip(noise) {
            let enc_trace = self.encoder.forward_trace(x);
            let (mu, logvar) = enc_trace.output().split_at(self.latent_dim);
            let std: Vec<f64> = logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
            let z: Vec<f64> = mu.iter().zip(&std).zip(eps).map(|((m, s), e)| m + s * e).collect();
            let dec_trace = self.decoder.forward_trace(&z);
            let x_hat = dec_trace.output();
            let dim = x.len() as f64;
            recon_sum += mse(x_hat, x);
            kl_sum += mu
                .iter()
                .zip(logvar)
                .map(|(m, lv)| -0.5 * (1.0 + lv - m * m - lv.exp()))
                .sum::<f64>();

            let grad_out: Vec<f64> = x_hat.iter().zip(x.iter()).map(|(a, b)| 2.0 * (a - b) / dim / count).collect();
            let grad_z = self.decoder.backward(&dec_trace, &grad_out, &mut g_dec);
            let beta = self.kl_weight / count;
            let mut grad_head = Vec::with_capacity(2 * self.latent_dim);
            for j in 0..self.latent_dim {
                grad_head.push(grad_z[j] + beta * mu[j]);
            }
            for j in 0..self.latent_dim {
                grad_head.push(grad_z[j] * eps[j] * 0.5 * std[j] + beta * 0.5 * (logvar[j].exp() - 1.0));
            }
            self.encoder.backward(&enc_trace, &grad_head, &mut g_enc);
        }
        let reconstruction = recon_sum / count;
        let kl = kl_sum / count;
        (VaeLoss { total: reconstruction + self.kl_weight * kl, reconstruction, kl }, g_enc, g_dec)
    }
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedEncoder {
    pub vae: Vae,
    pub standardizer: Standardizer,
    /// Posterior means, one per material in database order.
    pub latents: Vec<Vec<f64>>,
    /// Mean training loss (reconstruction + weighted KL) per epoch.
    pub loss_history: Vec<f64>,
    /// Mean reconstruction error over the catalog, decoded from posterior means.
    pub final_reconstruction_loss: f64,
}

/// Trains the autoencoder on standardized rows. Deterministic given `cfg.seed`.
pub fn train(rows: &[Vec<f64>], cfg: &EncoderConfig) -> Result<(Vae, Vec<f64>), EmbeddingError> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(EmbeddingError::TooFewMaterials { found: 0, needed: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut vae = Vae::new(rows[0].len(), cfg, &mut rng);
    let adam = AdamConfig { learning_rate: cfg.learning_rate, ..AdamConfig::default() };
    let mut opt_enc = Adam::new(adam, vae.encoder.param_count());
    let mut opt_dec = Adam::new(adam, vae.decoder.param_count());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mean_error = |vae: &Vae| rows.iter().map(|r| vae.reconstruction_error(r)).sum::<f64>() / rows.len() as f64;
    let mut best = (mean_error(&vae), vae.clone());
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| rows[i].as_slice()).collect();
            let noise: Vec<Vec<f64>> = batch
                .iter()
                .map(|_| (0..cfg.latent_dim).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let (loss, g_enc, g_dec) = vae.loss_and_gradients(&batch, &noise);
            if !loss.total.is_finite() {
                return Err(EmbeddingError::Diverged { epoch });
            }
            epoch_loss += loss.total * batch.len() as f64;
            opt_enc.update(vae.encoder.params_mut(), &g_enc);
            opt_dec.update(vae.decoder.params_mut(), &g_dec);
        }
        history.push(epoch_loss / rows.len() as f64);
        let error = mean_error(&vae);
        if !error.is_finite() {
            return Err(EmbeddingError::Diverged { epoch });
        }
        if error < best.0 {
            best = (error, vae.clone());
        }
    }
    Ok((best.1, history))
}

/// Resamples the catalog on `cfg.input_grid`, standardizes it and trains the
/// autoencoder.
pub fn train_encoder(db: &MaterialDb, cfg: &EncoderConfig) -> Result<TrainedEncoder, EmbeddingError> {
    cfg.validate()?;
    if db.len() < 10 {
        return Err(EmbeddingError::TooFewMaterials { found: db.len(), needed: 10 });
    }
    let raw = raw_features(db, &cfg.input_grid)?;
    let standardizer = Standardizer::fit(&raw);
    let rows: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let (vae, loss_history) = train(&rows, cfg)?;
    let latents: Vec<Vec<f64>> = rows.iter().map(|r| vae.encode(r).0).collect();
    let final_reconstruction_loss =
        rows.iter().map(|r| vae.reconstruction_error(r)).sum::<f64>() / rows.len() as f64;
    Ok(TrainedEncoder { vae, standardizer, latents, loss_history, final_reconstruction_loss })
}
