//! Desk-scale DQN: uniform replay, ε-greedy exploration, periodic target
//! sync, squared TD error and plain SGD.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::mlp::{Layer, MlpPolicy};
use crate::env::Env;
use crate::error::{input_err, Error, Result};
use crate::math::{all_finite, sqrt};
use crate::model::QFunction;
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: u64,
    pub target_sync_interval: u64,
    pub max_steps: u64,
    /// Environment steps collected before the first gradient update.
    pub learning_starts: u64,
    /// Episodes are truncated (not terminated) after this many steps.
    pub max_episode_steps: usize,
    /// Mean return over the trailing 100 episodes that ends training.
    pub solve_threshold: f64,
    /// Global gradient-norm cap applied to each mini-batch update.
    pub max_grad_norm: f64,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            replay_capacity: 50_000,
            batch_size: 32,
            gamma: 0.99,
            learning_rate: 5e-3,
            epsilon_start: 1.0,
            epsilon_end: 0.01,
            epsilon_decay_steps: 10_000,
            target_sync_interval: 500,
            max_steps: 200_000,
            learning_starts: 1_000,
            max_episode_steps: 500,
            solve_threshold: 195.0,
            max_grad_norm: 10.0,
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(input_err!("gamma must lie in (0, 1]"));
        }
        if self.replay_capacity == 0
            || self.batch_size == 0
            || self.target_sync_interval == 0
            || self.max_episode_steps == 0
        {
            return Err(input_err!("capacities and intervals must be positive"));
        }
        if !(self.learning_rate > 0.0) || !(self.max_grad_norm > 0.0) {
            return Err(input_err!("learning rate and gradient cap must be positive"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return Err(input_err!("epsilon bounds must lie in [0, 1]"));
        }
        Ok(())
    }

    fn epsilon(&self, step: u64) -> f64 {
        if step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = step as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity FIFO replay memory.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Uniform sampling with replacement.
    pub fn sample<'a, R: Rng>(&'a self, rng: &mut R, n: usize) -> impl Iterator<Item = &'a Transition> + 'a {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..self.items.len())).collect();
        idx.into_iter().map(move |i| &self.items[i])
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: MlpPolicy,
    /// Mean return of the last (up to) 100 completed episodes; 0 if none.
    pub trailing_mean: f64,
    pub steps: u64,
    pub episodes: usize,
    pub solved: bool,
}

const TRAILING_WINDOW: usize = 100;

fn trailing_mean(returns: &[f64]) -> f64 {
    let tail = &returns[returns.len().saturating_sub(TRAILING_WINDOW)..];
    crate::math::mean(tail)
}

/// Trains a fresh `[d, 64, 64, A]` Q-network on `env`.
///
/// Stops once at least 100 episodes have completed and their trailing mean
/// return reaches `solve_threshold`, or after `max_steps` environment steps.
pub fn train_dqn(env: &mut dyn Env, config: &DqnConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let spec = env.spec().clone();
    let mut policy = MlpPolicy::random(spec.state_dim, spec.action_count, derive_seed(config.seed, 0))?;
    let mut target = policy.clone();
    let mut rng = stream(config.seed, 1);
    let mut replay = ReplayBuffer::new(config.replay_capacity);
    let mut grads = zero_like(&policy);

    let mut returns: Vec<f64> = Vec::new();
    let mut episode = 0u64;
    let mut state = env.reset(derive_seed(config.seed, 1_000 + episode)).values;
    let mut ep_return = 0.0;
    let mut ep_len = 0usize;
    let mut solved = false;
    let mut step = 0u64;

    while step < config.max_steps {
        let action = if rng.random::<f64>() < config.epsilon(step) {
            rng.random_range(0..spec.action_count)
        } else {
            policy.greedy_action(&state)?
        };
        let out = env.step(action)?;
        ep_return += out.reward;
        ep_len += 1;
        replay.push(Transition {
            state: core::mem::take(&mut state),
            action,
            reward: out.reward,
            next_state: out.next_state.values.clone(),
            terminal: out.terminal,
        });
        state = out.next_state.values;
        step += 1;

        if out.terminal || ep_len >= config.max_episode_steps {
            returns.push(ep_return);
            episode += 1;
            state = env.reset(derive_seed(config.seed, 1_000 + episode)).values;
            ep_return = 0.0;
            ep_len = 0;
            if returns.len() >= TRAILING_WINDOW && trailing_mean(&returns) >= config.solve_threshold {
                solved = true;
                break;
            }
        }

        if step >= config.learning_starts && replay.len() >= config.batch_size {
            let loss = sgd_update(&mut policy, &target, &replay, &mut grads, &mut rng, config);
            if !loss.is_finite() || !policy.layers().iter().all(|l| all_finite(&l.weights)) {
                return Err(Error::Training { step, reason: format!("non-finite loss {loss}") });
            }
        }
        if step.is_multiple_of(config.target_sync_interval) {
            target.clone_from(&policy);
        }
    }

    Ok(TrainOutcome {
        trailing_mean: trailing_mean(&returns),
        policy,
        steps: step,
        episodes: returns.len(),
        solved,
    })
}

fn zero_like(policy: &MlpPolicy) -> [Layer; 3] {
    let [a, b, c] = policy.layers();
    [
        Layer::zeros(a.inputs, a.outputs),
        Layer::zeros(b.inputs, b.outputs),
        Layer::zeros(c.inputs, c.outputs),
    ]
}

/// One mini-batch step; returns the mean squared TD error.
fn sgd_update<R: Rng>(
    policy: &mut MlpPolicy,
    target: &MlpPolicy,
    replay: &ReplayBuffer,
    grads: &mut [Layer; 3],
    rng: &mut R,
    config: &DqnConfig,
) -> f64 {
    for g in grads.iter_mut() {
        g.weights.iter_mut().for_each(|v| *v = 0.0);
        g.bias.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut loss = 0.0;
    for t in replay.sample(rng, config.batch_size) {
        let bootstrap = if t.terminal {
            0.0
        } else {
            let q_next = target.trace(&t.next_state).q;
            q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let y = t.reward + config.gamma * bootstrap;
        let err = policy.accumulate_td_gradient(&t.state, t.action, y, grads);
        loss += err * err;
    }
    let n = config.batch_size as f64;
    let norm_sq: f64 = grads
        .iter()
        .flat_map(|g| g.weights.iter().chain(&g.bias))
        .map(|v| (v / n) * (v / n))
        .sum();
    let norm = sqrt(norm_sq);
    let scale = if norm > config.max_grad_norm { config.max_grad_norm / norm } else { 1.0 };
    let step = config.learning_rate * scale / n;
    for (layer, grad) in policy.layers_mut().iter_mut().zip(grads.iter()) {
        for (w, g) in layer.weights.iter_mut().zip(&grad.weights) {
            *w -= step * g;
        }
        for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
            *b -= step * g;
        }
    }
    loss / n
}
