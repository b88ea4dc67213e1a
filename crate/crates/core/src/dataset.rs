//! State-action interaction datasets with per-feature statistics.

use alloc::vec::Vec;

use rand::Rng;

use crate::env::{Env, EnvSpec, EnvState};
use crate::error::{input_err, Result};
use crate::math::sqrt;
use crate::model::QFunction;
use crate::rng::{derive_seed, rng_from_seed};

/// Default number of pairs collected for a benchmark dataset.
pub const DEFAULT_DATASET_SIZE: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SAPair {
    pub state: EnvState,
    pub action: usize,
}

/// Ordered `(state, action)` pairs plus population mean/std per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    spec: EnvSpec,
    pairs: Vec<SAPair>,
    feature_mean: Vec<f64>,
    feature_std: Vec<f64>,
}

impl Dataset {
    pub fn new(spec: EnvSpec, pairs: Vec<SAPair>) -> Result<Self> {
        spec.validate()?;
        if pairs.is_empty() {
            return Err(input_err!("dataset must contain at least one pair"));
        }
        for (i, pair) in pairs.iter().enumerate() {
            spec.check_state(pair.state.as_slice())
                .map_err(|e| input_err!("pair {i}: {e}"))?;
            spec.check_action(pair.action).map_err(|e| input_err!("pair {i}: {e}"))?;
        }
        let (feature_mean, feature_std) = feature_stats(&pairs, spec.state_dim);
        Ok(Self { spec, pairs, feature_mean, feature_std })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn pairs(&self) -> &[SAPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        self.pairs[i].state.as_slice()
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.pairs.iter().map(|p| p.state.as_slice())
    }

    pub fn feature_mean(&self) -> &[f64] {
        &self.feature_mean
    }

    /// Population standard deviation; exactly 0 for constant columns.
    pub fn feature_std(&self) -> &[f64] {
        &self.feature_std
    }

    /// Uniform sample of `n` pairs without replacement, in draw order.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let idx = subsample_indices(self.len(), n, seed)?;
        let pairs = idx.iter().map(|&i| self.pairs[i].clone()).collect();
        Dataset::new(self.spec.clone(), pairs)
    }
}

/// Mean and population std of each feature column.
pub fn feature_stats(pairs: &[SAPair], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = pairs.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for p in pairs {
        for (m, v) in mean.iter_mut().zip(p.state.as_slice()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = alloc::vec![0.0; dim];
    for p in pairs {
        for ((s, v), m) in var.iter_mut().zip(p.state.as_slice()).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    let std = var.into_iter().map(|s| sqrt(s / n)).collect();
    (mean, std)
}

/// Indices of a uniform sample of `n` out of `len` without replacement
/// (partial Fisher-Yates), in draw order.
pub fn subsample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > len {
        return Err(input_err!("sample size {n} outside [1, {len}]"));
    }
    let mut rng = rng_from_seed(seed);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = rng.random_range(i..len);
        idx.swap(i, j);
    }
    idx.truncate(n);
    Ok(idx)
}

/// Greedy rollouts of `policy`, recording each state with the action taken
/// from it before stepping. Episode `e` resets with a seed derived from
/// `(seed, e)`.
pub fn collect(
    env: &mut dyn Env,
    policy: &dyn QFunction,
    episodes: usize,
    max_steps: usize,
    seed: u64,
) -> Result<Dataset> {
    let spec = env.spec().clone();
    if policy.state_dim() != spec.state_dim || policy.action_count() != spec.action_count {
        return Err(input_err!(
            "policy shape ({}, {}) does not match env ({}, {})",
            policy.state_dim(),
            policy.action_count(),
            spec.state_dim,
            spec.action_count
        ));
    }
    let mut pairs = Vec::new();
    for episode in 0..episodes {
        let mut state = env.reset(derive_seed(seed, episode as u64));
        for _ in 0..max_steps {
            let action = policy.greedy_action(state.as_slice())?;
            let out = env.step(action)?;
            pairs.push(SAPair { state, action });
            if out.terminal {
                break;
            }
            state = out.next_state;
        }
    }
    Dataset::new(spec, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{planted_truth_model, CartPole, EnvKind, SyntheticLinear};
    use crate::policy::MlpPolicy;
    use alloc::vec;

    fn toy(n: usize) -> Dataset {
        let spec = EnvSpec::new("toy", &["a", "b"], 2).unwrap();
        let pairs = (0..n)
            .map(|i| SAPair { state: EnvState::new(vec![i as f64, 3.0]).unwrap(), action: i % 2 })
            .collect();
        Dataset::new(spec, pairs).unwrap()
    }

    #[test]
    fn stats_are_population_moments() {
        let ds = toy(4);
        assert_eq!(ds.feature_mean(), &[1.5, 3.0]);
        // population variance of 0..4 is 1.25
        assert!((ds.feature_std()[0] - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(ds.feature_std()[1], 0.0);
    }

    #[test]
    fn empty_and_invalid_pairs_rejected() {
        let spec = EnvSpec::new("toy", &["a"], 2).unwrap();
        assert!(Dataset::new(spec.clone(), vec![]).is_err());
        let bad = vec![SAPair { state: EnvState::new(vec![0.0]).unwrap(), action: 5 }];
        assert!(Dataset::new(spec, bad).is_err());
    }

    #[test]
    fn collect_respects_step_cap_and_is_deterministic() {
        let policy = MlpPolicy::random(4, 2, 1).unwrap();
        let a = collect(&mut CartPole::new(), &policy, 1, 5, 3).unwrap();
        assert!(a.len() <= 5);
        let b = collect(&mut CartPole::new(), &policy, 1, 5, 3).unwrap();
        assert_eq!(a, b);
        let policy3 = MlpPolicy::random(3, 2, 1).unwrap();
        assert!(collect(&mut CartPole::new(), &policy3, 1, 5, 3).is_err());
    }

    #[test]
    fn synthetic_actions_equal_planted_argmax() {
        let spec = EnvKind::SyntheticLinear.spec();
        let (model, w) = planted_truth_model(&spec).unwrap();
        let ds = collect(&mut SyntheticLinear::new(), &model, 10, 100, 0).unwrap();
        assert_eq!(ds.len(), 1000);
        for pair in ds.pairs() {
            let s = pair.state.as_slice();
            let scores: Vec<f64> = w.iter().map(|row| row.iter().zip(s).map(|(a, b)| a * b).sum()).collect();
            let mut best = 0;
            for a in 1..scores.len() {
                if scores[a] > scores[best] {
                    best = a;
                }
            }
            assert_eq!(pair.action, best);
        }
    }

    #[test]
    fn subsample_edge_cases() {
        let ds = toy(10);
        let full = ds.subsample(10, 1).unwrap();
        let mut got: Vec<f64> = full.states().map(|s| s[0]).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, (0..10).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(ds.subsample(1, 42).unwrap(), ds.subsample(1, 42).unwrap());
        assert!(ds.subsample(0, 1).is_err());
        assert!(ds.subsample(11, 1).is_err());
    }

    #[test]
    fn single_draws_are_uniform() {
        // Monte-Carlo uniformity: 10,000 single draws from 10 items, each
        // expected 1000 times; 150 is ~5 standard deviations.
        let mut counts = [0usize; 10];
        for seed in 0..10_000u64 {
            counts[subsample_indices(10, 1, seed).unwrap()[0]] += 1;
        }
        for c in counts {
            assert!((850..=1150).contains(&c), "{counts:?}");
        }
    }
}
