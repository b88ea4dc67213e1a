//! Path-integrated gradient attributions.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::ExplainerConfig;
use crate::dataset::Dataset;
use crate::error::{check_dim, input_err, Result};
use crate::model::Differentiable;
use crate::rng::rng_from_seed;

/// Integrated gradients with the midpoint rule:
/// `φ_i = (x_i − b_i) · (1/m) Σ_k ∂Q_a/∂s_i (b + (k − ½)/m · (x − b))`.
pub fn explain_ig(
    policy: &dyn Differentiable,
    state: &[f64],
    action: usize,
    baseline: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    check_dim("state", policy.state_dim(), state.len())?;
    check_dim("baseline", state.len(), baseline.len())?;
    if steps == 0 {
        return Err(input_err!("ig_steps must be at least 1"));
    }
    let delta: Vec<f64> = state.iter().zip(baseline).map(|(x, b)| x - b).collect();
    let mut grad_sum = vec![0.0; state.len()];
    let mut point = vec![0.0; state.len()];
    for k in 0..steps {
        let alpha = (k as f64 + 0.5) / steps as f64;
        for ((p, b), d) in point.iter_mut().zip(baseline).zip(&delta) {
            *p = b + alpha * d;
        }
        let g = policy.input_gradient(&point, action)?;
        for (s, gi) in grad_sum.iter_mut().zip(&g) {
            *s += gi;
        }
    }
    Ok(grad_sum.iter().zip(&delta).map(|(g, d)| d * g / steps as f64).collect())
}

/// Expected gradients: average of `g(b + α(x − b)) ⊙ (x − b)` over
/// baselines `b` drawn uniformly from the dataset and `α ~ U(0, 1)`.
pub fn explain_gradient_shap(
    policy: &dyn Differentiable,
    state: &[f64],
    action: usize,
    dataset: &Dataset,
    config: &ExplainerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dim("state", policy.state_dim(), state.len())?;
    if dataset.is_empty() {
        return Err(input_err!("gradient_shap needs a non-empty baseline pool"));
    }
    check_dim("dataset", state.len(), dataset.spec().state_dim)?;
    let mut rng = rng_from_seed(seed);
    let mut acc = vec![0.0; state.len()];
    let mut point = vec![0.0; state.len()];
    for _ in 0..config.gshap_samples {
        let baseline = dataset.state(rng.random_range(0..dataset.len()));
        let alpha: f64 = rng.random();
        for ((p, x), b) in point.iter_mut().zip(state).zip(baseline) {
            *p = b + alpha * (x - b);
        }
        let g = policy.input_gradient(&point, action)?;
        for (((a, gi), x), b) in acc.iter_mut().zip(&g).zip(state).zip(baseline) {
            *a += gi * (x - b);
        }
    }
    let n = config.gshap_samples as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}
