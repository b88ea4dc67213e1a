//! Perturbation saliency and SARFA: remove one feature at a time and watch
//! how the softmax policy moves.

use alloc::vec;
use alloc::vec::Vec;

use super::{softmax_policy, ExplainerConfig, Perturbation};
use crate::dataset::Dataset;
use crate::error::{check_dim, Result};
use crate::math::ln;
use crate::model::QFunction;
use crate::rng::{rng_from_seed, standard_normal, SeededRng};

/// Floor applied to probabilities before taking logs in the KL term.
const KL_FLOOR: f64 = 1e-12;

/// Perturbed copies of `state` with feature `i` removed per the configured
/// scheme: one mean-replaced copy, or `gaussian_draws` jittered copies.
fn perturbations(
    state: &[f64],
    i: usize,
    dataset: &Dataset,
    config: &ExplainerConfig,
    rng: &mut SeededRng,
) -> Vec<Vec<f64>> {
    match config.perturbation {
        Perturbation::MeanReplace => {
            let mut s = state.to_vec();
            s[i] = dataset.feature_mean()[i];
            vec![s]
        }
        Perturbation::Gaussian => {
            let sigma = config.perturbation_scale * dataset.feature_std()[i];
            (0..config.gaussian_draws)
                .map(|_| {
                    let mut s = state.to_vec();
                    s[i] += sigma * standard_normal(rng);
                    s
                })
                .collect()
        }
    }
}

/// `saliency_i = ½ ‖π(s) − π(s⁽ⁱ⁾)‖²` with π the softmax over Q-values,
/// averaged over perturbation draws. Action-agnostic.
pub fn explain_perturbation_saliency(
    policy: &dyn QFunction,
    state: &[f64],
    dataset: &Dataset,
    config: &ExplainerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dim("state", policy.state_dim(), state.len())?;
    let base = softmax_policy(&policy.q_values(state)?).probs;
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let perturbed = perturbations(state, i, dataset, config, &mut rng);
        let mut total = 0.0;
        for s in &perturbed {
            let p = softmax_policy(&policy.q_values(s)?).probs;
            total += 0.5 * base.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        out.push(total / perturbed.len() as f64);
    }
    Ok(out)
}

/// SARFA score for one perturbation, from the action distributions before
/// (`p`) and after (`q`). Harmonic mean of specificity `ΔP` and relevance
/// `1 / (1 + KL(p_rem ‖ q_rem))`, zero when `ΔP <= 0`.
pub fn sarfa_salience(p: &[f64], q: &[f64], action: usize) -> f64 {
    let delta = p[action] - q[action];
    if !(delta > 0.0) {
        return 0.0;
    }
    let remaining = |dist: &[f64]| -> Vec<f64> {
        let rest: Vec<f64> = dist
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != action)
            .map(|(_, &v)| v.max(KL_FLOOR))
            .collect();
        let total: f64 = rest.iter().sum();
        rest.into_iter().map(|v| (v / total).max(KL_FLOOR)).collect()
    };
    let (pr, qr) = (remaining(p), remaining(q));
    let kl: f64 = pr.iter().zip(&qr).map(|(a, b)| a * ln(a / b)).sum();
    let relevance = 1.0 / (1.0 + kl.max(0.0));
    2.0 * delta * relevance / (delta + relevance)
}

pub fn explain_sarfa(
    policy: &dyn QFunction,
    state: &[f64],
    action: usize,
    dataset: &Dataset,
    config: &ExplainerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dim("state", policy.state_dim(), state.len())?;
    let base = softmax_policy(&policy.q_values(state)?).probs;
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let perturbed = perturbations(state, i, dataset, config, &mut rng);
        let mut total = 0.0;
        for s in &perturbed {
            let q = softmax_policy(&policy.q_values(s)?).probs;
            total += sarfa_salience(&base, &q, action);
        }
        out.push(total / perturbed.len() as f64);
    }
    Ok(out)
}
