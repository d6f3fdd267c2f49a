//! Small fully-connected networks with hand-written backpropagation and the
//! Adam optimizer. Shared by the material autoencoder and the actor-critic.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Multilayer perceptron; all parameters live in one flat vector, layer by
/// layer, each layer as a row-major `outputs × inputs` weight block followed
/// by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    widths: Vec<usize>,
    hidden: Activation,
    output: Activation,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass, needed for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `outputs[0]` is the input; `outputs[l + 1]` the post-activation of layer `l`.
    outputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("trace has at least the input")
    }

    /// Pre-activation values of each layer.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

impl Mlp {
    /// Uniform `±1/sqrt(fan_in)` initialization; the last layer is further
    /// scaled by `last_layer_scale`. Biases start at zero.
    pub fn new<R: Rng + ?Sized>(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        last_layer_scale: f64,
        rng: &mut R,
    ) -> Self {
        assert!(widths.len() >= 2, "need input and output widths");
        assert!(widths.iter().all(|&w| w > 0), "widths must be positive");
        let count = Self::count_params(widths);
        let mut params = Vec::with_capacity(count);
        let layers = widths.len() - 1;
        for l in 0..layers {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let scale = if l + 1 == layers { last_layer_scale } else { 1.0 };
            for _ in 0..fan_in * fan_out {
                params.push(rng.random_range(-bound..bound) * scale);
            }
            params.extend(core::iter::repeat_n(0.0, fan_out));
        }
        Self { widths: widths.to_vec(), hidden, output, params }
    }

    fn count_params(widths: &[usize]) -> usize {
        widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        self.widths[self.widths.len() - 1]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 2 == self.widths.len() {
            self.output
        } else {
            self.hidden
        }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        let mut offset = 0;
        for l in 0..self.widths.len() - 1 {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let act = self.activation(l);
            x = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    act.apply(b[o] + row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>())
                })
                .collect();
            offset += n_in * n_out + n_out;
        }
        x
    }

    pub fn forward_trace(&self, input: &[f64]) -> Trace {
        assert_eq!(input.len(), self.input_width(), "input width");
        let mut outputs = vec![input.to_vec()];
        let mut pre = Vec::with_capacity(self.widths.len() - 1);
        let mut offset = 0;
        for l in 0..self.widths.len() - 1 {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = &outputs[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| b[o] + w[o * n_in..(o + 1) * n_in].iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
                .collect();
            let act = self.activation(l);
            outputs.push(z.iter().map(|&v| act.apply(v)).collect());
            pre.push(z);
            offset += n_in * n_out + n_out;
        }
        Trace { outputs, pre }
    }

    /// Accumulates `d loss / d params` into `grads` given `d loss / d output`,
    /// and returns `d loss / d input`.
    pub fn backward(&self, trace: &Trace, grad_output: &[f64], grads: &mut [f64]) -> Vec<f64> {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer size");
        assert_eq!(grad_output.len(), self.output_width(), "output gradient width");
        let layers = self.widths.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for l in 0..layers {
            offsets.push(offset);
            offset += self.widths[l] * self.widths[l + 1] + self.widths[l + 1];
        }
        let mut upstream = grad_output.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let act = self.activation(l);
            let delta: Vec<f64> = (0..n_out)
                .map(|o| upstream[o] * act.derivative(trace.pre[l][o], trace.outputs[l + 1][o]))
                .collect();
            let base = offsets[l];
            let x = &trace.outputs[l];
            for o in 0..n_out {
                let d = delta[o];
                if d != 0.0 {
                    let row = &mut grads[base + o * n_in..base + (o + 1) * n_in];
                    for (g, v) in row.iter_mut().zip(x) {
                        *g += d * v;
                    }
                }
                grads[base + n_in * n_out + o] += d;
            }
            let w = &self.params[base..base + n_in * n_out];
            let mut down = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d != 0.0 {
                    for (acc, a) in down.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *acc += d * a;
                    }
                }
            }
            upstream = down;
        }
        upstream
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam moment accumulators for one parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(config: AdamConfig, size: usize) -> Self {
        Self { config, step: 0, m: vec![0.0; size], v: vec![0.0; size] }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one descent step (`params -= lr * m̂ / (sqrt(v̂) + ε)`).
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count");
        assert_eq!(grads.len(), self.m.len(), "gradient count");
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}
