//! Local linear surrogate fitted by weighted ridge regression.

use alloc::vec;
use alloc::vec::Vec;

use super::ExplainerConfig;
use crate::dataset::Dataset;
use crate::error::{check_dim, input_err, Error, Result};
use crate::math::{exp, sqrt};
use crate::model::QFunction;
use crate::rng::{rng_from_seed, standard_normal};

const DEFAULT_KERNEL_SCALE: f64 = 0.75;

/// Solves `min Σ w_j (y_j − β₀ − x_j·β)² + λ‖β‖²` (intercept unpenalised)
/// through the normal equations and a Cholesky factorisation. Returns
/// `(β₀, β)`.
pub fn weighted_ridge(rows: &[Vec<f64>], y: &[f64], weights: &[f64], ridge: f64) -> Result<(f64, Vec<f64>)> {
    let k = rows.first().map_or(0, Vec::len);
    let p = k + 1;
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut design = vec![0.0; p];
    for ((row, &target), &w) in rows.iter().zip(y).zip(weights) {
        design[0] = 1.0;
        design[1..].copy_from_slice(row);
        for a in 0..p {
            let wa = w * design[a];
            rhs[a] += wa * target;
            for b in 0..=a {
                gram[a * p + b] += wa * design[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[b * p + a] = gram[a * p + b];
        }
    }
    for a in 1..p {
        gram[a * p + a] += ridge;
    }
    let beta = cholesky_solve(&mut gram, &rhs, p)
        .ok_or_else(|| Error::Internal("LIME normal equations are singular".into()))?;
    Ok((beta[0], beta[1..].to_vec()))
}

/// In-place Cholesky of a symmetric `n × n` matrix followed by two
/// triangular solves. `None` if the matrix is not positive definite.
fn cholesky_solve(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let l_jj = sqrt(diag);
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / l_jj;
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * z[k];
        }
        z[i] = v / a[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = z[i];
        for k in i + 1..n {
            v -= a[k * n + i] * x[k];
        }
        x[i] = v / a[i * n + i];
    }
    Some(x)
}

/// Samples `z = x + N(0, diag(std²))`, scores `Q_a(z)`, weights samples by
/// an exponential kernel on the standardised distance and fits a weighted
/// ridge surrogate on standardised features. Coefficients are returned on
/// the raw feature scale; zero-variance features get 0.
pub fn explain_tabular_lime(
    policy: &dyn QFunction,
    state: &[f64],
    action: usize,
    dataset: &Dataset,
    config: &ExplainerConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    let d = state.len();
    check_dim("state", policy.state_dim(), d)?;
    if config.lime_samples < d + 1 {
        return Err(input_err!("lime_samples must be at least d + 1 = {}", d + 1));
    }
    if action >= policy.action_count() {
        return Err(input_err!("action {action} out of range"));
    }
    let std = dataset.feature_std();
    let active: Vec<usize> = (0..d).filter(|&i| std[i] > 0.0).collect();
    let width = config.lime_kernel_width.unwrap_or(DEFAULT_KERNEL_SCALE * sqrt(d as f64));
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(config.lime_samples);
    let mut targets = Vec::with_capacity(config.lime_samples);
    let mut weights = Vec::with_capacity(config.lime_samples);
    let mut z = state.to_vec();
    for _ in 0..config.lime_samples {
        let mut standardized = Vec::with_capacity(active.len());
        let mut dist_sq = 0.0;
        for &i in &active {
            let u = standard_normal(&mut rng);
            z[i] = state[i] + std[i] * u;
            standardized.push(u);
            dist_sq += u * u;
        }
        targets.push(policy.q_values(&z)?[action]);
        weights.push(exp(-dist_sq / (width * width)));
        rows.push(standardized);
    }
    let mut values = vec![0.0; d];
    if active.is_empty() {
        return Ok(values);
    }
    let (_, coef) = weighted_ridge(&rows, &targets, &weights, config.lime_ridge)?;
    for (&i, c) in active.iter().zip(coef) {
        values[i] = c / std[i];
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SAPair;
    use crate::env::{EnvKind, EnvState, PLANTED_WEIGHTS};
    use crate::policy::MlpPolicy;
    use crate::rng::uniform;

    fn uniform_pool(n: usize, seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        let pairs = (0..n)
            .map(|_| SAPair {
                state: EnvState::new((0..8).map(|_| uniform(&mut rng, -1.0, 1.0)).collect()).unwrap(),
                action: 0,
            })
            .collect();
        Dataset::new(EnvKind::SyntheticLinear.spec(), pairs).unwrap()
    }

    #[test]
    fn ridge_recovers_exact_plane() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.5 + 2.0 * r[0] - 3.0 * r[1]).collect();
        let w = vec![1.0; 20];
        let (b0, b) = weighted_ridge(&rows, &y, &w, 0.0).unwrap();
        assert!((b0 - 1.5).abs() < 1e-9 && (b[0] - 2.0).abs() < 1e-9 && (b[1] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn linear_teacher_coefficients_recovered() {
        let policy = MlpPolicy::from_linear(&PLANTED_WEIGHTS.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let ds = uniform_pool(500, 1);
        let config = ExplainerConfig::default();
        let x = [0.3, -0.5, 0.8, 0.1, -0.2, 0.6, -0.7, 0.4];
        for (a, row) in PLANTED_WEIGHTS.iter().enumerate() {
            let coef = explain_tabular_lime(&policy, &x, a, &ds, &config, 7).unwrap();
            for i in 0..8 {
                let w = row[i];
                assert!((coef[i] - w).abs() <= 0.02 * w.abs(), "a={a} i={i}: {} vs {w}", coef[i]);
            }
        }
    }

    #[test]
    fn constant_teacher_gives_zero() {
        let policy = MlpPolicy::zeros(8, 3).unwrap();
        let ds = uniform_pool(100, 2);
        let coef = explain_tabular_lime(&policy, &[0.1; 8], 0, &ds, &ExplainerConfig::default(), 3).unwrap();
        assert!(coef.iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn too_few_samples_rejected() {
        let policy = MlpPolicy::zeros(8, 3).unwrap();
        let ds = uniform_pool(10, 2);
        let config = ExplainerConfig { lime_samples: 8, ..ExplainerConfig::default() };
        assert!(explain_tabular_lime(&policy, &[0.0; 8], 0, &ds, &config, 0).is_err());
    }

    #[test]
    fn zero_std_feature_gets_zero() {
        let policy = MlpPolicy::random(2, 2, 0).unwrap();
        let spec = crate::env::EnvSpec::new("toy", &["a", "b"], 2).unwrap();
        let pairs = (0..5)
            .map(|i| SAPair { state: EnvState::new(vec![i as f64, 1.0]).unwrap(), action: 0 })
            .collect();
        let ds = Dataset::new(spec, pairs).unwrap();
        let coef = explain_tabular_lime(&policy, &[0.5, 1.0], 1, &ds, &ExplainerConfig::default(), 0).unwrap();
        assert_eq!(coef[1], 0.0);
    }
}
