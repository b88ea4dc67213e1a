//! Relative input stability: worst-case ratio of relative explanation
//! change to relative input change over a prediction-preserving
//! neighbourhood.

use alloc::vec::Vec;

use crate::error::{check_dim, input_err, Result};
use crate::math::{abs, p_norm};
use crate::model::QFunction;
use crate::rng::{derive_seed, rng_from_seed, standard_normal};

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub n_nbr: usize,
    /// Neighbour noise on feature i is `noise_scale · std_i`.
    pub noise_scale: f64,
    pub feature_std: Vec<f64>,
    pub eps_min: f64,
    /// 1 or 2.
    pub p: u32,
    /// Elementwise floor on `|e_x|` and `|x|` in the relative changes.
    pub eps_den: f64,
    pub seed: u64,
}

impl StabilityConfig {
    pub fn new(feature_std: Vec<f64>) -> Self {
        Self { n_nbr: 32, noise_scale: 0.05, feature_std, eps_min: 1e-4, p: 2, eps_den: 1e-6, seed: 0 }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        check_dim("feature_std", dim, self.feature_std.len())?;
        if self.n_nbr == 0 || !(self.eps_min > 0.0) || !(self.eps_den > 0.0) {
            return Err(input_err!("n_nbr, eps_min and eps_den must be positive"));
        }
        if self.p != 1 && self.p != 2 {
            return Err(input_err!("p must be 1 or 2"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(input_err!("noise scale must be non-negative"));
        }
        Ok(())
    }
}

/// `max_{x'} ‖(e_x − e_x') / max(|e_x|, ε_den)‖_p / max(‖(x − x') / max(|x|, ε_den)‖_p, ε_min)`
/// over Gaussian neighbours `x'` that keep the greedy action of `x`.
///
/// `explain` must be deterministic in its input. Returns `None` when no
/// neighbour preserves the prediction.
pub fn ris(
    explain: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    model: &dyn QFunction,
    x: &[f64],
    config: &StabilityConfig,
    stream: u64,
) -> Result<Option<f64>> {
    config.validate(x.len())?;
    let action = model.greedy_action(x)?;
    let e_x = explain(x)?;
    check_dim("explanation", x.len(), e_x.len())?;
    let mut rng = rng_from_seed(derive_seed(config.seed, stream));
    let mut best: Option<f64> = None;
    let mut neighbour = x.to_vec();
    for _ in 0..config.n_nbr {
        for (i, v) in neighbour.iter_mut().enumerate() {
            *v = x[i] + config.noise_scale * config.feature_std[i] * standard_normal(&mut rng);
        }
        if model.greedy_action(&neighbour)? != action {
            continue;
        }
        let e_n = explain(&neighbour)?;
        let num = p_norm(
            e_x.iter().zip(&e_n).map(|(a, b)| (a - b) / abs(*a).max(config.eps_den)),
            config.p,
        );
        let den = p_norm(
            x.iter().zip(&neighbour).map(|(a, b)| (a - b) / abs(*a).max(config.eps_den)),
            config.p,
        )
        .max(config.eps_min);
        let ratio = num / den;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    Ok(best)
}
