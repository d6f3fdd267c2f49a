//! Actor-critic material selection.
//!
//! Every layer owns a position on a 100 × 100 grid over the environment
//! map. Actions nudge one layer's position by one cell; the environment
//! resolves positions to materials, optimizes thicknesses and reports a
//! merit, which the reward table turns into a scalar signal. Workers share
//! one global network through a [`ParamStore`].

pub mod toy;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EnvPoint;
use crate::nn::{softmax, Activation, Adam, AdamConfig, Mlp};

/// Cells per axis; coordinates are `cell / 100`, so they span `[0, 0.99]`.
pub const GRID_CELLS: u8 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum A3cError {
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("layer {layer} is out of range for a {layers}-layer state")]
    BadLayer { layer: usize, layers: usize },
    #[error("action {index} is outside a table of {len}")]
    BadAction { index: usize, len: usize },
    #[error("state has {found} positions, network expects {expected}")]
    StateShape { found: usize, expected: usize },
}

/// Positions of all layers, stored as grid cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvState {
    cells: Vec<[u8; 2]>,
}

impl EnvState {
    pub fn from_cells(cells: Vec<[u8; 2]>) -> Self {
        let cells = cells.into_iter().map(|[x, y]| [x.min(GRID_CELLS - 1), y.min(GRID_CELLS - 1)]).collect();
        Self { cells }
    }

    /// Snaps each point to the nearest grid cell.
    pub fn from_points(points: &[EnvPoint]) -> Self {
        let snap = |v: f64| (v * 100.0).round().clamp(0.0, (GRID_CELLS - 1) as f64) as u8;
        Self { cells: points.iter().map(|p| [snap(p.x), snap(p.y)]).collect() }
    }

    /// Uniformly random cell per layer.
    pub fn random<R: Rng + ?Sized>(layers: usize, rng: &mut R) -> Self {
        Self { cells: (0..layers).map(|_| [rng.random_range(0..GRID_CELLS), rng.random_range(0..GRID_CELLS)]).collect() }
    }

    pub fn cells(&self) -> &[[u8; 2]] {
        &self.cells
    }

    pub fn layers(&self) -> usize {
        self.cells.len()
    }

    pub fn positions(&self) -> Vec<EnvPoint> {
        self.cells.iter().map(|&[x, y]| EnvPoint { x: x as f64 / 100.0, y: y as f64 / 100.0 }).collect()
    }

    /// Network input: `[x1, y1, x2, y2, …]`.
    pub fn features(&self) -> Vec<f64> {
        self.cells.iter().flat_map(|&[x, y]| [x as f64 / 100.0, y as f64 / 100.0]).collect()
    }
}

/// One cell move of one layer. `layer` counts from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub layer: usize,
    pub dx: i8,
    pub dy: i8,
}

impl Action {
    pub fn delta(self) -> (f64, f64) {
        (self.dx as f64 / 100.0, self.dy as f64 / 100.0)
    }
}

/// Move order for a layer, following the reference action table: layers 1
/// and 2 go +x, +y, −x, −y; layer 3 reverses that; layer 4 goes −x, −y, +y,
/// +x. Later layers reuse the layer-1 order.
fn layer_moves(layer: usize) -> [(i8, i8); 4] {
    match layer {
        3 => [(-1, 0), (0, -1), (1, 0), (0, 1)],
        4 => [(-1, 0), (0, -1), (0, 1), (1, 0)],
        _ => [(1, 0), (0, 1), (-1, 0), (0, -1)],
    }
}

/// Discrete action set over the movable layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionTable {
    actions: Vec<Action>,
}

impl ActionTable {
    /// Four actions for each listed layer (1-based), in the given order.
    pub fn for_layers(layers: &[usize]) -> Self {
        let actions = layers
            .iter()
            .flat_map(|&layer| layer_moves(layer).into_iter().map(move |(dx, dy)| Action { layer, dx, dy }))
            .collect();
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn decode(&self, index: usize) -> Result<Action, A3cError> {
        self.actions.get(index).copied().ok_or(A3cError::BadAction { index, len: self.actions.len() })
    }

    pub fn encode(&self, action: Action) -> Option<usize> {
        self.actions.iter().position(|&a| a == action)
    }
}

/// Table for layers `1..=movable_layers`.
pub fn build_action_table(movable_layers: usize) -> ActionTable {
    ActionTable::for_layers(&(1..=movable_layers).collect::<Vec<_>>())
}

/// Moves one layer by one cell, clamping at the grid edges.
pub fn step(state: &EnvState, action: Action) -> Result<EnvState, A3cError> {
    if action.layer == 0 || action.layer > state.layers() {
        return Err(A3cError::BadLayer { layer: action.layer, layers: state.layers() });
    }
    let mut next = state.clone();
    let cell = &mut next.cells[action.layer - 1];
    let shift = |c: u8, d: i8| (c as i16 + d as i16).clamp(0, (GRID_CELLS - 1) as i16) as u8;
    cell[0] = shift(cell[0], action.dx);
    cell[1] = shift(cell[1], action.dy);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub stall_threshold: usize,
    pub stall_penalty: f64,
    pub no_improve_penalty: f64,
    pub success_reward: f64,
    /// Merit at or below which the design counts as meeting the target.
    pub success_merit_threshold: f64,
    pub observation_scale: f64,
    pub gamma: f64,
    pub n_steps: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            stall_threshold: 20,
            stall_penalty: -1.0,
            no_improve_penalty: -0.01,
            success_reward: 1.0,
            success_merit_threshold: 0.0,
            observation_scale: 1.0,
            gamma: 0.99,
            n_steps: 8,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), A3cError> {
        if self.stall_threshold == 0 {
            return Err(A3cError::BadConfig("stall_threshold must be positive"));
        }
        if !(self.success_merit_threshold >= 0.0) {
            return Err(A3cError::BadConfig("success_merit_threshold must be non-negative"));
        }
        if !(self.observation_scale > 0.0) {
            return Err(A3cError::BadConfig("observation_scale must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(A3cError::BadConfig("gamma must lie in (0, 1]"));
        }
        if self.n_steps == 0 {
            return Err(A3cError::BadConfig("n_steps must be positive"));
        }
        Ok(())
    }
}

/// Which row of the reward table fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardCase {
    Success,
    Improved,
    Stalled,
    NotImproved,
}

impl RewardCase {
    pub fn is_terminal(self) -> bool {
        matches!(self, RewardCase::Success | RewardCase::Stalled)
    }
}

/// Reward for reaching `new_merit` after `steps_since_improvement`
/// consecutive non-improving steps (this one included when it does not improve).
pub fn compute_reward(
    prev_best_merit: f64,
    new_merit: f64,
    steps_since_improvement: usize,
    cfg: &RewardConfig,
    observation_error: f64,
) -> (f64, RewardCase) {
    if new_merit <= cfg.success_merit_threshold {
        (cfg.success_reward, RewardCase::Success)
    } else if new_merit < prev_best_merit {
        (cfg.observation_scale / (1.0 + observation_error), RewardCase::Improved)
    } else if steps_since_improvement >= cfg.stall_threshold {
        (cfg.stall_penalty, RewardCase::Stalled)
    } else {
        (cfg.no_improve_penalty, RewardCase::NotImproved)
    }
}

/// Actor and critic networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(layers: usize, actions: usize, rng: &mut R) -> Self {
        let d = 2 * layers;
        Self {
            actor: Mlp::new(&[d, 32, 16, actions], Activation::Relu, Activation::Identity, 0.01, rng),
            critic: Mlp::new(&[d, 32, 16, 16, 1], Activation::Relu, Activation::Identity, 1.0, rng),
        }
    }

    fn check_input(&self, features: &[f64]) -> Result<(), A3cError> {
        if features.len() != self.actor.input_width() {
            return Err(A3cError::StateShape { found: features.len() / 2, expected: self.actor.input_width() / 2 });
        }
        Ok(())
    }

    pub fn actor_forward(&self, state: &EnvState) -> Result<Vec<f64>, A3cError> {
        let x = state.features();
        self.check_input(&x)?;
        if !self.actor.is_finite() {
            return Err(A3cError::NonFinite { what: "actor parameters" });
        }
        let p = softmax(&self.actor.forward(&x));
        if p.iter().all(|v| v.is_finite()) {
            Ok(p)
        } else {
            Err(A3cError::NonFinite { what: "policy" })
        }
    }

    pub fn critic_forward(&self, state: &EnvState) -> Result<f64, A3cError> {
        let x = state.features();
        self.check_input(&x)?;
        if !self.critic.is_finite() {
            return Err(A3cError::NonFinite { what: "critic parameters" });
        }
        let v = self.critic.forward(&x)[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(A3cError::NonFinite { what: "value" })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite() && self.critic.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: EnvState,
    pub action: usize,
    pub reward: f64,
    pub next_state: EnvState,
    pub terminal: bool,
}

/// Discounted returns computed backwards from `bootstrap`.
pub fn n_step_returns(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = bootstrap;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// Loss gradients for one trajectory segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
    pub actor_loss: f64,
    pub critic_loss: f64,
}

/// Actor loss `-Σ [log π(a|s)·A + β·H(π(s))]` with advantages held fixed.
pub fn actor_loss(net: &Mlp, states: &[EnvState], actions: &[usize], advantages: &[f64], beta: f64) -> f64 {
    let mut loss = 0.0;
    for ((s, &a), &adv) in states.iter().zip(actions).zip(advantages) {
        let p = softmax(&net.forward(&s.features()));
        let entropy: f64 = -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>();
        loss -= p[a].ln() * adv + beta * entropy;
    }
    loss
}

/// Critic loss `Σ (R - V(s))²`.
pub fn critic_loss(net: &Mlp, states: &[EnvState], returns: &[f64]) -> f64 {
    states.iter().zip(returns).map(|(s, r)| (r - net.forward(&s.features())[0]).powi(2)).sum()
}

/// Gradients of both losses for a segment ending in `bootstrap`.
pub fn trajectory_gradients(
    net: &ActorCritic,
    trajectory: &[Transition],
    bootstrap: f64,
    gamma: f64,
    entropy_beta: f64,
) -> Result<Gradients, A3cError> {
    let rewards: Vec<f64> = trajectory.iter().map(|t| t.reward).collect();
    let returns = n_step_returns(&rewards, bootstrap, gamma);
    let mut g_actor = vec![0.0; net.actor.param_count()];
    let mut g_critic = vec![0.0; net.critic.param_count()];
    let (mut actor_loss, mut critic_loss) = (0.0, 0.0);
    for (t, &ret) in trajectory.iter().zip(&returns) {
        let x = t.state.features();
        net.check_input(&x)?;
        let c_trace = net.critic.forward_trace(&x);
        let value = c_trace.output()[0];
        let advantage = ret - value;
        critic_loss += advantage * advantage;
        net.critic.backward(&c_trace, &[-2.0 * advantage], &mut g_critic);

        let a_trace = net.actor.forward_trace(&x);
        let p = softmax(a_trace.output());
        let entropy: f64 = -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>();
        actor_loss -= p[t.action].ln() * advantage + entropy_beta * entropy;
        let grad_logits: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, &pj)| {
                let onehot = if j == t.action { 1.0 } else { 0.0 };
                let log_p = if pj > 0.0 { pj.ln() } else { 0.0 };
                (pj - onehot) * advantage + entropy_beta * pj * (log_p + entropy)
            })
            .collect();
        net.actor.backward(&a_trace, &grad_logits, &mut g_actor);
    }
    let finite = actor_loss.is_finite()
        && critic_loss.is_finite()
        && g_actor.iter().chain(&g_critic).all(|g| g.is_finite());
    if !finite {
        return Err(A3cError::NonFinite { what: "loss" });
    }
    Ok(Gradients { actor: g_actor, critic: g_critic, actor_loss, critic_loss })
}

/// Global network plus optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    pub net: ActorCritic,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub version: u64,
}

impl GlobalParams {
    pub fn new(net: ActorCritic, learning_rate: f64) -> Self {
        let cfg = AdamConfig { learning_rate, ..AdamConfig::default() };
        let actor_opt = Adam::new(cfg, net.actor.param_count());
        let critic_opt = Adam::new(cfg, net.critic.param_count());
        Self { net, actor_opt, critic_opt, version: 0 }
    }

    /// Applies one segment's gradients; parameters are left untouched if the
    /// step would make them non-finite.
    pub fn apply(&mut self, grads: &Gradients) -> Result<u64, A3cError> {
        let mut next = self.clone();
        next.actor_opt.update(next.net.actor.params_mut(), &grads.actor);
        next.critic_opt.update(next.net.critic.params_mut(), &grads.critic);
        if !next.net.is_finite() {
            return Err(A3cError::NonFinite { what: "parameters after update" });
        }
        next.version += 1;
        *self = next;
        Ok(self.version)
    }
}

/// Shared access to the global network.
pub trait ParamStore {
    /// Consistent copy of the current network.
    fn snapshot(&self) -> ActorCritic;
    /// Atomically applies one segment's gradients, returning the new version.
    fn apply(&self, grads: &Gradients) -> Result<u64, A3cError>;
    fn version(&self) -> u64;
}

/// Single-threaded store.
#[derive(Debug)]
pub struct LocalParams(RefCell<GlobalParams>);

impl LocalParams {
    pub fn new(params: GlobalParams) -> Self {
        Self(RefCell::new(params))
    }

    pub fn into_inner(self) -> GlobalParams {
        self.0.into_inner()
    }
}

impl ParamStore for LocalParams {
    fn snapshot(&self) -> ActorCritic {
        self.0.borrow().net.clone()
    }

    fn apply(&self, grads: &Gradients) -> Result<u64, A3cError> {
        self.0.borrow_mut().apply(grads)
    }

    fn version(&self) -> u64 {
        self.0.borrow().version
    }
}

/// Result of scoring one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub merit: f64,
    pub observation_error: f64,
    /// Whether the inner optimizer was skipped thanks to the memo cache.
    pub cache_hit: bool,
}

/// Scores states. Implementations are shared by all workers.
pub trait Environment {
    type Error: fmt::Display;
    fn layers(&self) -> usize;
    fn evaluate(&self, state: &EnvState) -> Result<Evaluation, Self::Error>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct A3cConfig {
    pub reward: RewardConfig,
    pub entropy_beta: f64,
    pub learning_rate: f64,
    /// Episode length cap; reaching it truncates without a terminal reward.
    pub max_episode_steps: usize,
    pub workers: usize,
    /// 1-based layers that never move.
    pub frozen_layers: Vec<usize>,
    pub seed: u64,
}

impl Default for A3cConfig {
    fn default() -> Self {
        Self {
            reward: RewardConfig::default(),
            entropy_beta: 0.01,
            learning_rate: 1e-4,
            max_episode_steps: 200,
            workers: 4,
            frozen_layers: Vec::new(),
            seed: 0,
        }
    }
}

impl A3cConfig {
    pub fn validate(&self, layers: usize) -> Result<(), A3cError> {
        self.reward.validate()?;
        if !(self.learning_rate > 0.0) {
            return Err(A3cError::BadConfig("learning_rate must be positive"));
        }
        if !(self.entropy_beta >= 0.0) {
            return Err(A3cError::BadConfig("entropy_beta must be non-negative"));
        }
        if self.max_episode_steps == 0 {
            return Err(A3cError::BadConfig("max_episode_steps must be positive"));
        }
        if self.workers == 0 {
            return Err(A3cError::BadConfig("need at least one worker"));
        }
        if let Some(&layer) = self.frozen_layers.iter().find(|&&l| l == 0 || l > layers) {
            return Err(A3cError::BadLayer { layer, layers });
        }
        Ok(())
    }

    pub fn movable_layers(&self, layers: usize) -> Vec<usize> {
        (1..=layers).filter(|l| !self.frozen_layers.contains(l)).collect()
    }

    pub fn action_table(&self, layers: usize) -> ActionTable {
        ActionTable::for_layers(&self.movable_layers(layers))
    }

    /// Fresh global parameters seeded from `seed`.
    pub fn init_params(&self, layers: usize) -> GlobalParams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_a3c0);
        let net = ActorCritic::new(layers, self.action_table(layers).len(), &mut rng);
        GlobalParams::new(net, self.learning_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalReason {
    Success,
    Stalled,
    StepCap,
    Failed,
}

impl TerminalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalReason::Success => "success",
            TerminalReason::Stalled => "stalled",
            TerminalReason::StepCap => "step_cap",
            TerminalReason::Failed => "failed",
        }
    }
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub worker_id: usize,
    pub steps: usize,
    pub terminal_reason: TerminalReason,
    pub total_reward: f64,
    /// Best merit seen in this episode, with the state that reached it.
    pub best_merit: f64,
    pub best_state: EnvState,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub updates: usize,
    /// Set when the episode ended on an evaluation or update failure.
    pub error: Option<String>,
}

/// One worker's private state: its random stream and the action table.
pub struct Worker {
    pub id: usize,
    rng: ChaCha8Rng,
    table: ActionTable,
    cfg: A3cConfig,
    layers: usize,
}

fn sample(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

impl Worker {
    /// Random stream seeded with `cfg.seed + id`.
    pub fn new(id: usize, layers: usize, cfg: &A3cConfig) -> Result<Self, A3cError> {
        cfg.validate(layers)?;
        let table = cfg.action_table(layers);
        if table.is_empty() {
            return Err(A3cError::BadConfig("every layer is frozen"));
        }
        Ok(Self { id, rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(id as u64)), table, cfg: cfg.clone(), layers })
    }

    /// Plays one episode from a random start, pushing an update after every
    /// `n_steps` transitions and at the end.
    pub fn run_episode<P, E>(&mut self, episode: usize, store: &P, env: &E) -> EpisodeSummary
    where
        P: ParamStore + ?Sized,
        E: Environment + ?Sized,
    {
        let start = EnvState::random(self.layers, &mut self.rng);
        let mut summary = EpisodeSummary {
            episode,
            worker_id: self.id,
            steps: 0,
            terminal_reason: TerminalReason::Failed,
            total_reward: 0.0,
            best_merit: f64::INFINITY,
            best_state: start.clone(),
            cache_hits: 0,
            cache_misses: 0,
            updates: 0,
            error: None,
        };
        let count = |summary: &mut EpisodeSummary, hit: bool| {
            if hit {
                summary.cache_hits += 1;
            } else {
                summary.cache_misses += 1;
            }
        };
        let first = match env.evaluate(&start) {
            Ok(e) => e,
            Err(e) => {
                summary.error = Some(e.to_string());
                return summary;
            }
        };
        count(&mut summary, first.cache_hit);
        summary.best_merit = first.merit;
        let rc = self.cfg.reward;
        let mut state = start;
        let mut stall = 0usize;
        loop {
            let local = store.snapshot();
            let mut segment: Vec<Transition> = Vec::with_capacity(rc.n_steps);
            let mut outcome: Option<TerminalReason> = None;
            while segment.len() < rc.n_steps {
                let probs = match local.actor_forward(&state) {
                    Ok(p) => p,
                    Err(e) => {
                        summary.error = Some(e.to_string());
                        summary.terminal_reason = TerminalReason::Failed;
                        return summary;
                    }
                };
                let index = sample(&probs, self.rng.random::<f64>());
                let action = self.table.decode(index).expect("sampled index is inside the table");
                let next = step(&state, action).expect("table only holds valid layers");
                let eval = match env.evaluate(&next) {
                    Ok(e) => e,
                    Err(e) => {
                        summary.error = Some(e.to_string());
                        outcome = Some(TerminalReason::Failed);
                        break;
                    }
                };
                count(&mut summary, eval.cache_hit);
                let improved = eval.merit < summary.best_merit;
                stall = if improved { 0 } else { stall + 1 };
                let (reward, case) = compute_reward(summary.best_merit, eval.merit, stall, &rc, eval.observation_error);
                if eval.merit < summary.best_merit {
                    summary.best_merit = eval.merit;
                    summary.best_state = next.clone();
                }
                summary.steps += 1;
                summary.total_reward += reward;
                segment.push(Transition { state, action: index, reward, next_state: next.clone(), terminal: case.is_terminal() });
                state = next;
                outcome = match case {
                    RewardCase::Success => Some(TerminalReason::Success),
                    RewardCase::Stalled => Some(TerminalReason::Stalled),
                    _ if summary.steps >= self.cfg.max_episode_steps => Some(TerminalReason::StepCap),
                    _ => None,
                };
                if outcome.is_some() {
                    break;
                }
            }
            if !segment.is_empty() {
                let terminal = segment.last().is_some_and(|t| t.terminal);
                let bootstrap = if terminal { Ok(0.0) } else { local.critic_forward(&state) };
                let applied = bootstrap
                    .and_then(|v| trajectory_gradients(&local, &segment, v, rc.gamma, self.cfg.entropy_beta))
                    .and_then(|g| store.apply(&g));
                match applied {
                    Ok(_) => summary.updates += 1,
                    Err(e) => {
                        summary.error = Some(e.to_string());
                        summary.terminal_reason = TerminalReason::Failed;
                        return summary;
                    }
                }
            }
            if let Some(reason) = outcome {
                summary.terminal_reason = reason;
                return summary;
            }
        }
    }
}

/// Runs episodes while `claim` hands out episode numbers, reporting each
/// finished episode to `report`.
pub fn run_worker<P, E, C, R>(
    worker_id: usize,
    store: &P,
    env: &E,
    cfg: &A3cConfig,
    mut claim: C,
    mut report: R,
) -> Result<(), A3cError>
where
    P: ParamStore + ?Sized,
    E: Environment + ?Sized,
    C: FnMut() -> Option<usize>,
    R: FnMut(EpisodeSummary),
{
    let mut worker = Worker::new(worker_id, env.layers(), cfg)?;
    while let Some(episode) = claim() {
        report(worker.run_episode(episode, store, env));
    }
    Ok(())
}

/// Single-threaded training for `episodes` episodes. Returns the trained
/// parameters and the per-episode summaries.
pub fn train_single<E: Environment + ?Sized>(
    env: &E,
    cfg: &A3cConfig,
    episodes: usize,
) -> Result<(GlobalParams, Vec<EpisodeSummary>), A3cError> {
    cfg.validate(env.layers())?;
    let store = LocalParams::new(cfg.init_params(env.layers()));
    let mut next = 0usize;
    let mut log = Vec::with_capacity(episodes);
    run_worker(
        0,
        &store,
        env,
        cfg,
        || {
            (next < episodes).then(|| {
                next += 1;
                next - 1
            })
        },
        |s| log.push(s),
    )?;
    Ok((store.into_inner(), log))
}
