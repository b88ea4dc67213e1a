//! Input gradients against finite differences and IG completeness.

use rand::Rng;
use xrl_core::explain::explain_ig;
use xrl_core::policy::MlpPolicy;
use xrl_core::rng::{rng_from_seed, uniform, SeededRng};
use xrl_core::{Differentiable, QFunction};

fn random_state(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| uniform(rng, -2.0, 2.0)).collect()
}

/// Smallest |pre-activation| over both hidden layers, recomputed by hand.
fn kink_margin(policy: &MlpPolicy, x: &[f64]) -> f64 {
    let mut act = x.to_vec();
    let mut margin = f64::INFINITY;
    for layer in &policy.layers()[..2] {
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| layer.row(o).iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + layer.bias[o])
            .collect();
        margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
        act = z.iter().map(|v| v.max(0.0)).collect();
    }
    margin
}

#[test]
fn input_gradient_matches_central_differences() {
    let h = 1e-4;
    let mut rng = rng_from_seed(31);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 50 {
        attempts += 1;
        assert!(attempts < 10_000);
        let d = rng.random_range(1..=12);
        let actions = rng.random_range(2..=4);
        let policy = MlpPolicy::random(d, actions, rng.random()).unwrap();
        let x = random_state(&mut rng, d);
        if kink_margin(&policy, &x) < 1e-2 {
            continue;
        }
        let a = rng.random_range(0..actions);
        let g = policy.input_gradient(&x, a).unwrap();
        for i in 0..d {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (policy.q_values(&up).unwrap()[a] - policy.q_values(&down).unwrap()[a]) / (2.0 * h);
            let tol = 1e-4_f64.max(1e-3 * g[i].abs());
            assert!((fd - g[i]).abs() <= tol, "case {checked} feature {i}: fd {fd} vs {}", g[i]);
        }
        checked += 1;
    }
}

#[test]
fn ig_completeness_on_random_policies() {
    let mut rng = rng_from_seed(77);
    for case in 0..100 {
        let d = rng.random_range(1..=12);
        let actions = rng.random_range(2..=4);
        let policy = MlpPolicy::random(d, actions, rng.random()).unwrap();
        let x = random_state(&mut rng, d);
        let b = if case % 2 == 0 { vec![0.0; d] } else { random_state(&mut rng, d) };
        let a = rng.random_range(0..actions);
        let phi = explain_ig(&policy, &x, a, &b, 256).unwrap();
        let gap = policy.q_values(&x).unwrap()[a] - policy.q_values(&b).unwrap()[a];
        let err = (phi.iter().sum::<f64>() - gap).abs();
        assert!(err <= 1e-2 * (1.0 + gap.abs()), "case {case}: err {err}, gap {gap}");
    }
}

#[test]
fn ig_on_linear_encoding_is_exact() {
    let w = vec![vec![1.5, -2.0, 0.25], vec![-0.5, 3.0, 1.0]];
    let policy = MlpPolicy::from_linear(&w).unwrap();
    let x = [0.7, -1.3, 2.2];
    let b = [0.1, 0.4, -0.6];
    for (a, row) in w.iter().enumerate() {
        let phi = explain_ig(&policy, &x, a, &b, 8).unwrap();
        for i in 0..3 {
            let expect = row[i] * (x[i] - b[i]);
            assert!((phi[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()), "{} vs {expect}", phi[i]);
        }
    }
}
