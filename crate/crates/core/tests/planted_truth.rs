//! Explainers and metrics on the planted linear scorer.

use rand::Rng;
use xrl_core::dataset::collect;
use xrl_core::env::{planted_truth_model, EnvKind, LinearModel};
use xrl_core::eval::{aim, aum, pgi, pgu, FidelityConfig, TopKMode};
use xrl_core::explain::{explain, ExplainContext, ExplainerConfig, Method};
use xrl_core::rng::rng_from_seed;
use xrl_core::trees::{fit_gbdt, GbdtParams};
use xrl_core::{Dataset, QFunction};

const TOP_FEATURE: usize = 0;

fn planted_dataset(n: usize, seed: u64) -> (LinearModel, Dataset) {
    let kind = EnvKind::SyntheticLinear;
    let (model, _) = planted_truth_model(&kind.spec()).unwrap();
    let mut env = kind.build();
    let data = collect(env.as_mut(), &model, 1, n, seed).unwrap();
    (model, data)
}

/// Position of `feature` when sorting by decreasing |φ|, lower index first.
fn rank_of(phi: &[f64], feature: usize) -> usize {
    let key = phi[feature].abs();
    phi.iter()
        .enumerate()
        .filter(|&(i, v)| v.abs() > key || (v.abs() == key && i < feature))
        .count()
}

fn random_attributions(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

#[test]
fn every_method_ranks_planted_feature_above_random() {
    let (model, data) = planted_dataset(2_000, 5);
    let student = fit_gbdt(&data, &GbdtParams::default()).unwrap().model;
    let config = ExplainerConfig { lime_samples: 400, ..ExplainerConfig::default() };
    let ctx = ExplainContext { policy: Some(&model), student: Some(&student), dataset: Some(&data), config: &config };
    let d = data.spec().state_dim;
    let random_mean = (d - 1) as f64 / 2.0;
    for method in Method::ALL {
        let mut total = 0usize;
        for i in 0..200 {
            let x = data.state(i);
            let a = model.greedy_action(x).unwrap();
            let phi = explain(method, &ctx, x, a, i as u64).unwrap().values;
            total += rank_of(&phi, TOP_FEATURE);
        }
        let mean = total as f64 / 200.0;
        assert!(mean < random_mean, "{method}: mean rank {mean}");
    }
}

#[test]
fn tabular_shap_ranks_planted_feature_first() {
    let (model, data) = planted_dataset(5_000, 9);
    let student = fit_gbdt(&data, &GbdtParams::default()).unwrap().model;
    let config = ExplainerConfig::default();
    let ctx = ExplainContext { policy: None, student: Some(&student), dataset: Some(&data), config: &config };
    let hits = (0..200)
        .filter(|&i| {
            let x = data.state(i);
            let a = model.greedy_action(x).unwrap();
            rank_of(&explain(Method::TabularShap, &ctx, x, a, 0).unwrap().values, TOP_FEATURE) == 0
        })
        .count();
    assert!(hits >= 180, "{hits}/200");
}

#[test]
fn truth_dominates_random_on_fidelity_metrics() {
    let (model, data) = planted_dataset(500, 13);
    let d = data.spec().state_dim;
    let states: Vec<Vec<f64>> = data.states().map(<[f64]>::to_vec).collect();
    let truth: Vec<Vec<f64>> =
        states.iter().map(|x| model.true_importance(x, model.greedy_action(x).unwrap())).collect();
    let random = random_attributions(states.len(), d, 99);
    let reference = vec![0.0; d];
    let mode = TopKMode::ByAbsoluteValue;

    let aim_truth = aim(&model, &states, &truth, 1, mode, &reference).unwrap();
    let aim_random = aim(&model, &states, &random, 1, mode, &reference).unwrap();
    assert!(aim_truth < aim_random, "AIM {aim_truth} vs {aim_random}");

    let aum_truth = aum(&model, &states, &truth, d - 1, mode, &reference).unwrap();
    let aum_random = aum(&model, &states, &random, d - 1, mode, &reference).unwrap();
    assert!(aum_truth > aum_random, "AUM {aum_truth} vs {aum_random}");

    let config = FidelityConfig { seed: 4, ..FidelityConfig::new(reference, data.feature_std().to_vec()) };
    let wins = states
        .iter()
        .zip(&truth)
        .enumerate()
        .filter(|(s, (x, e))| {
            let gi = pgi(&model, x, e, 1, mode, &config, *s as u64).unwrap();
            let gu = pgu(&model, x, e, 1, mode, &config, *s as u64).unwrap();
            gi > gu
        })
        .count();
    assert!(wins * 5 >= states.len() * 4, "PGI > PGU on {wins}/{}", states.len());
}
