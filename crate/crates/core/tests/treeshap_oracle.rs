//! TreeSHAP against the power-set Shapley oracle on random ensembles.

use proptest::prelude::*;
use rand::Rng;
use xrl_core::rng::{rng_from_seed, uniform, SeededRng};
use xrl_core::trees::{brute_shapley, tree_shap, GbdtModel, Node, RegressionTree};

fn random_tree(rng: &mut SeededRng, d: usize, max_depth: usize) -> RegressionTree {
    fn grow(rng: &mut SeededRng, nodes: &mut Vec<Node>, d: usize, depth: usize, cover: u64) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: uniform(rng, -2.0, 2.0), cover });
        if depth == 0 || cover < 2 || rng.random::<f64>() < 0.15 {
            return id;
        }
        let feature = rng.random_range(0..d);
        let threshold = uniform(rng, -1.0, 1.0);
        let left_cover = rng.random_range(1..cover);
        let left = grow(rng, nodes, d, depth - 1, left_cover);
        let right = grow(rng, nodes, d, depth - 1, cover - left_cover);
        nodes[id] = Node::Split { feature, threshold, left, right, cover };
        id
    }
    let mut nodes = Vec::new();
    let cover = rng.random_range(2..2_000);
    grow(rng, &mut nodes, d, max_depth, cover);
    RegressionTree::new(nodes).unwrap()
}

fn random_model(rng: &mut SeededRng, d: usize, max_depth: usize, trees: usize) -> GbdtModel {
    let actions = 2;
    let ensembles = (0..actions)
        .map(|_| (0..trees).map(|_| random_tree(rng, d, max_depth)).collect())
        .collect();
    let base = (0..actions).map(|_| uniform(rng, -1.0, 1.0)).collect();
    GbdtModel::new(ensembles, uniform(rng, 0.05, 1.0), base, d).unwrap()
}

#[test]
fn tree_shap_matches_power_set_oracle() {
    let mut rng = rng_from_seed(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=10);
        let depth = rng.random_range(1..=4);
        let trees = rng.random_range(1..=20);
        let model = random_model(&mut rng, d, depth, trees);
        let state: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.2, 1.2)).collect();
        let action = rng.random_range(0..2);
        let fast = tree_shap(&model, &state, action).unwrap();
        let slow = brute_shapley(&model, &state, action).unwrap();
        let margin = model.predict_margin(&state).unwrap()[action];
        for (a, b) in fast.phi.iter().zip(&slow.phi) {
            worst = worst.max((a - b).abs());
            assert!((a - b).abs() <= 1e-9, "{:?} vs {:?}", fast.phi, slow.phi);
        }
        assert!((fast.base_value - slow.base_value).abs() <= 1e-9);
        assert!((fast.total() - margin).abs() <= 1e-6);
        assert!((slow.total() - margin).abs() <= 1e-9);
        // Dummy axiom: unused features get exactly zero.
        for f in 0..d {
            if !model.trees(action).iter().any(|t| t.uses_feature(f)) {
                assert_eq!(fast.phi[f], 0.0);
            }
        }
    }
    eprintln!("max |tree_shap - brute| = {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_accuracy_holds(seed in any::<u64>(), d in 1usize..8, depth in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let model = random_model(&mut rng, d, depth, 5);
        let state: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -1.5, 1.5)).collect();
        for action in 0..2 {
            let shap = tree_shap(&model, &state, action).unwrap();
            let margin = model.predict_margin(&state).unwrap()[action];
            prop_assert!((shap.total() - margin).abs() < 1e-6);
        }
    }

    #[test]
    fn margin_equals_summed_path_walks(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let model = random_model(&mut rng, 4, 3, 5);
        let state: Vec<f64> = (0..4).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        for action in 0..2 {
            let mut total = 0.0;
            for tree in model.trees(action) {
                let mut id = 0;
                let leaf = loop {
                    match *tree.node(id) {
                        Node::Leaf { value, .. } => break value,
                        Node::Split { feature, threshold, left, right, .. } => {
                            id = if state[feature] < threshold { left } else { right };
                        }
                    }
                };
                total += leaf;
            }
            let expected = model.base_score()[action] + model.learning_rate() * total;
            prop_assert_eq!(model.predict_margin(&state).unwrap()[action], expected);
        }
    }
}
