//! Synthetic contextual-bandit environment with a planted linear scorer.
//!
//! States are i.i.d. uniform on `[-1, 1)^8`, drawn from the episode's seeded
//! ChaCha8 stream. Reward is 1 when the chosen action is the argmax of
//! `PLANTED_WEIGHTS · s`, else 0. Episodes never terminate on their own.

use alloc::vec::Vec;

use super::{Env, EnvSpec, EnvState, StepOutcome};
use crate::error::{check_dim, input_err, Result};
use crate::math::{abs, argmax, dot};
use crate::model::{Differentiable, QFunction};
use crate::rng::{rng_from_seed, uniform, SeededRng};

pub const SYNTHETIC_DIM: usize = 8;
pub const SYNTHETIC_ACTIONS: usize = 3;

/// Ground-truth weights, one row per action. Every row has strictly
/// decreasing magnitudes, and feature 0 dominates so the argmax is mostly
/// decided by the sign of `s_0` (action 2 wins only near `s_0 = 0`).
pub const PLANTED_WEIGHTS: [[f64; SYNTHETIC_DIM]; SYNTHETIC_ACTIONS] = [
    [20.0, 1.0, -0.9, 0.8, -0.7, 0.6, -0.5, 0.4],
    [-20.0, 1.0, 0.9, -0.8, 0.7, -0.6, 0.5, -0.4],
    [2.0, -1.5, 1.2, -1.0, 0.8, -0.6, 0.4, -0.2],
];

pub(super) fn spec() -> EnvSpec {
    EnvSpec::new(
        "synthetic-linear",
        &["x0", "x1", "x2", "x3", "x4", "x5", "x6", "x7"],
        SYNTHETIC_ACTIONS,
    )
    .expect("static spec")
}

/// `Q(s) = W s` with no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
}

impl LinearModel {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let d = weights.first().map_or(0, Vec::len);
        if weights.len() < 2 || d == 0 || weights.iter().any(|r| r.len() != d) {
            return Err(input_err!("linear model needs >= 2 equal-length non-empty rows"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Ground-truth importance `|W[a,i] * s_i|`.
    pub fn true_importance(&self, state: &[f64], action: usize) -> Vec<f64> {
        self.weights[action].iter().zip(state).map(|(w, s)| abs(w * s)).collect()
    }
}

impl QFunction for LinearModel {
    fn state_dim(&self) -> usize {
        self.weights[0].len()
    }

    fn action_count(&self) -> usize {
        self.weights.len()
    }

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        check_dim("state", self.state_dim(), state.len())?;
        Ok(self.weights.iter().map(|row| dot(row, state)).collect())
    }
}

impl Differentiable for LinearModel {
    fn input_gradient(&self, state: &[f64], action: usize) -> Result<Vec<f64>> {
        check_dim("state", self.state_dim(), state.len())?;
        if action >= self.action_count() {
            return Err(input_err!("action {action} out of range"));
        }
        Ok(self.weights[action].clone())
    }
}

/// Returns the planted scorer and its weight matrix for the synthetic env.
pub fn planted_truth_model(spec: &EnvSpec) -> Result<(LinearModel, Vec<Vec<f64>>)> {
    if spec.name != "synthetic-linear"
        || spec.state_dim != SYNTHETIC_DIM
        || spec.action_count != SYNTHETIC_ACTIONS
    {
        return Err(input_err!("planted truth exists only for synthetic-linear (d=8, A=3)"));
    }
    let weights: Vec<Vec<f64>> = PLANTED_WEIGHTS.iter().map(|r| r.to_vec()).collect();
    Ok((LinearModel::new(weights.clone())?, weights))
}

#[derive(Debug, Clone)]
pub struct SyntheticLinear {
    spec: EnvSpec,
    rng: SeededRng,
    state: Vec<f64>,
}

impl SyntheticLinear {
    pub fn new() -> Self {
        Self { spec: spec(), rng: rng_from_seed(0), state: alloc::vec![0.0; SYNTHETIC_DIM] }
    }

    fn draw(&mut self) -> Vec<f64> {
        (0..SYNTHETIC_DIM).map(|_| uniform(&mut self.rng, -1.0, 1.0)).collect()
    }
}

impl Default for SyntheticLinear {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for SyntheticLinear {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> EnvState {
        self.rng = rng_from_seed(seed);
        self.state = self.draw();
        EnvState { values: self.state.clone() }
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        self.spec.check_action(action)?;
        let scores: Vec<f64> = PLANTED_WEIGHTS.iter().map(|row| dot(row, &self.state)).collect();
        let reward = if argmax(&scores) == action { 1.0 } else { 0.0 };
        self.state = self.draw();
        Ok(StepOutcome { next_state: EnvState { values: self.state.clone() }, reward, terminal: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reset_matches_reference_rng_trace() {
        // Reference harness: first 8 f64 draws of ChaCha8 seeded with 0,
        // mapped affinely onto [-1, 1).
        let mut reference = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let expected: Vec<f64> = (0..8).map(|_| -1.0 + 2.0 * reference.random::<f64>()).collect();
        let mut env = SyntheticLinear::new();
        assert_eq!(env.reset(0).values, expected);
    }

    #[test]
    fn rows_have_strictly_decreasing_magnitudes() {
        for row in PLANTED_WEIGHTS {
            for pair in row.windows(2) {
                assert!(abs(pair[0]) > abs(pair[1]));
            }
        }
    }

    #[test]
    fn linear_identities() {
        let (model, w) = planted_truth_model(&spec()).unwrap();
        assert_eq!(model.q_values(&[0.0; 8]).unwrap(), alloc::vec![0.0; 3]);
        for i in 0..8 {
            let mut e = [0.0; 8];
            e[i] = 1.0;
            let q = model.q_values(&e).unwrap();
            for a in 0..3 {
                assert_eq!(q[a], w[a][i]);
            }
        }
    }

    #[test]
    fn argmax_matches_brute_force_dot_products() {
        let (model, w) = planted_truth_model(&spec()).unwrap();
        let mut rng = rng_from_seed(99);
        for _ in 0..100 {
            let s: Vec<f64> = (0..8).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (a, row) in w.iter().enumerate() {
                let mut score = 0.0;
                for i in 0..8 {
                    score += row[i] * s[i];
                }
                if score > best_score {
                    best_score = score;
                    best = a;
                }
            }
            assert_eq!(model.greedy_action(&s).unwrap(), best);
        }
    }

    #[test]
    fn planted_model_rejects_other_envs() {
        assert!(planted_truth_model(&super::super::cartpole::spec()).is_err());
    }

    #[test]
    fn reward_marks_optimal_action() {
        let mut env = SyntheticLinear::new();
        let s = env.reset(4);
        let (model, _) = planted_truth_model(&spec()).unwrap();
        let best = model.greedy_action(&s.values).unwrap();
        assert_eq!(env.step(best).unwrap().reward, 1.0);
    }
}
