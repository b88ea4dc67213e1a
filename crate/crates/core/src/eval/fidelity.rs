//! Masking accuracy (AIM/AUM) and perturbation prediction gaps (PGI/PGU).

use alloc::vec;
use alloc::vec::Vec;

use super::topk::{bottom_k, mask, top_k, TopKMode};
use crate::error::{check_dim, input_err, Result};
use crate::math::{abs, argmax, softmax};
use crate::model::QFunction;
use crate::rng::{derive_seed, rng_from_seed, standard_normal};

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityConfig {
    /// Masking baseline, usually the environment's all-zero reference state.
    pub reference_state: Vec<f64>,
    /// Per-feature dataset std; noise on feature i is `noise_scale · std_i`.
    pub feature_std: Vec<f64>,
    pub noise_scale: f64,
    pub n_pert: usize,
    pub seed: u64,
}

impl FidelityConfig {
    pub fn new(reference_state: Vec<f64>, feature_std: Vec<f64>) -> Self {
        Self { reference_state, feature_std, noise_scale: 0.1, n_pert: 32, seed: 0 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        check_dim("reference_state", dim, self.reference_state.len())?;
        check_dim("feature_std", dim, self.feature_std.len())?;
        if self.n_pert == 0 {
            return Err(input_err!("n_pert must be at least 1"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(input_err!("noise scale must be non-negative"));
        }
        Ok(())
    }
}

fn check_aligned<S: AsRef<[f64]>, A: AsRef<[f64]>>(samples: &[S], attributions: &[A]) -> Result<()> {
    if samples.len() != attributions.len() {
        return Err(input_err!(
            "{} samples but {} attributions",
            samples.len(),
            attributions.len()
        ));
    }
    if samples.is_empty() {
        return Err(input_err!("need at least one sample"));
    }
    Ok(())
}

fn masked_agreement<S: AsRef<[f64]>, A: AsRef<[f64]>>(
    model: &dyn QFunction,
    samples: &[S],
    attributions: &[A],
    reference: &[f64],
    select: impl Fn(&[f64]) -> Result<Vec<usize>>,
) -> Result<f64> {
    check_aligned(samples, attributions)?;
    let mut agree = 0usize;
    for (x, e) in samples.iter().zip(attributions) {
        let (x, e) = (x.as_ref(), e.as_ref());
        check_dim("attribution", x.len(), e.len())?;
        check_dim("reference_state", x.len(), reference.len())?;
        let before = model.greedy_action(x)?;
        let after = model.greedy_action(&mask(x, &select(e)?, reference))?;
        agree += usize::from(before == after);
    }
    Ok(agree as f64 / samples.len() as f64)
}

/// Fraction of samples whose greedy action survives masking the top-k
/// features with the reference values. Lower is better.
pub fn aim<S: AsRef<[f64]>, A: AsRef<[f64]>>(
    model: &dyn QFunction,
    samples: &[S],
    attributions: &[A],
    k: usize,
    mode: TopKMode,
    reference: &[f64],
) -> Result<f64> {
    masked_agreement(model, samples, attributions, reference, |e| top_k(e, k, mode))
}

/// As [`aim`] but masking the bottom-k features. Higher is better.
pub fn aum<S: AsRef<[f64]>, A: AsRef<[f64]>>(
    model: &dyn QFunction,
    samples: &[S],
    attributions: &[A],
    k: usize,
    mode: TopKMode,
    reference: &[f64],
) -> Result<f64> {
    masked_agreement(model, samples, attributions, reference, |e| bottom_k(e, k, mode))
}

/// Mean `|f(x) − f(x')|` where `f` is the softmax probability of the
/// original greedy action and `x'` adds Gaussian noise to `features` only.
/// Each draw samples noise for every feature in index order, so equal
/// feature sets under one seed see identical perturbations.
fn prediction_gap(
    model: &dyn QFunction,
    x: &[f64],
    features: &[usize],
    config: &FidelityConfig,
    stream: u64,
) -> Result<f64> {
    config.validate(x.len())?;
    let q = model.q_values(x)?;
    let target = argmax(&q);
    let f_x = softmax(&q)[target];
    let mut rng = rng_from_seed(derive_seed(config.seed, stream));
    let mut selected = vec![false; x.len()];
    for &i in features {
        selected[i] = true;
    }
    let mut noise = vec![0.0; x.len()];
    let mut perturbed = x.to_vec();
    let mut total = 0.0;
    for _ in 0..config.n_pert {
        for n in noise.iter_mut() {
            *n = standard_normal(&mut rng);
        }
        for i in 0..x.len() {
            perturbed[i] = if selected[i] {
                x[i] + config.noise_scale * config.feature_std[i] * noise[i]
            } else {
                x[i]
            };
        }
        let f_p = softmax(&model.q_values(&perturbed)?)[target];
        total += abs(f_x - f_p);
    }
    Ok(total / config.n_pert as f64)
}

/// Prediction gap when perturbing the top-k features. Higher is better.
pub fn pgi(
    model: &dyn QFunction,
    x: &[f64],
    attribution: &[f64],
    k: usize,
    mode: TopKMode,
    config: &FidelityConfig,
    stream: u64,
) -> Result<f64> {
    if k == 0 {
        return Err(input_err!("pgi needs k >= 1"));
    }
    check_dim("attribution", x.len(), attribution.len())?;
    prediction_gap(model, x, &top_k(attribution, k, mode)?, config, stream)
}

/// Prediction gap when perturbing the bottom-k features. Lower is better.
pub fn pgu(
    model: &dyn QFunction,
    x: &[f64],
    attribution: &[f64],
    k: usize,
    mode: TopKMode,
    config: &FidelityConfig,
    stream: u64,
) -> Result<f64> {
    if k == 0 {
        return Err(input_err!("pgu needs k >= 1"));
    }
    check_dim("attribution", x.len(), attribution.len())?;
    prediction_gap(model, x, &bottom_k(attribution, k, mode)?, config, stream)
}
