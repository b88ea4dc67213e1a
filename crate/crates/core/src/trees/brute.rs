//! Shapley values by enumerating every feature subset. Exponential in `d`;
//! exists to check [`super::tree_shap`].

use alloc::vec;
use alloc::vec::Vec;

use super::gbdt::GbdtModel;
use super::shap::ShapVector;
use super::tree::{Node, RegressionTree};
use crate::error::{check_dim, input_err, Error, Result};

pub const MAX_BRUTE_FEATURES: usize = 15;

/// `v(S)` for one tree: follow the sample at splits on features in `known`
/// (a bitmask), otherwise average both children by cover.
fn conditional_value(tree: &RegressionTree, state: &[f64], known: u32, node: usize) -> Result<f64> {
    match *tree.node(node) {
        Node::Leaf { value, .. } => Ok(value),
        Node::Split { feature, threshold, left, right, cover } => {
            if known & (1 << feature) != 0 {
                let next = if state[feature] < threshold { left } else { right };
                conditional_value(tree, state, known, next)
            } else {
                if cover == 0 {
                    return Err(Error::ModelIntegrity(alloc::format!("internal node {node} has zero cover")));
                }
                let lc = tree.node(left).cover() as f64;
                let rc = tree.node(right).cover() as f64;
                let lv = conditional_value(tree, state, known, left)?;
                let rv = conditional_value(tree, state, known, right)?;
                Ok((lc * lv + rc * rv) / cover as f64)
            }
        }
    }
}

/// `φ_i = Σ_{S ⊆ F∖{i}} |S|!(d−|S|−1)!/d! · (v(S∪{i}) − v(S))` on the
/// action's margin.
pub fn brute_shapley(model: &GbdtModel, state: &[f64], action: usize) -> Result<ShapVector> {
    let d = model.n_features();
    check_dim("state", d, state.len())?;
    if d > MAX_BRUTE_FEATURES {
        return Err(Error::Resource(alloc::format!(
            "brute-force Shapley limited to {MAX_BRUTE_FEATURES} features, got {d}"
        )));
    }
    if action >= model.n_actions() {
        return Err(input_err!("action {action} out of range"));
    }
    let eta = model.learning_rate();
    let base = model.base_score()[action];
    let subsets = 1usize << d;
    let mut value = vec![0.0; subsets];
    for (mask, slot) in value.iter_mut().enumerate() {
        let mut total = base;
        for tree in model.trees(action) {
            total += eta * conditional_value(tree, state, mask as u32, 0)?;
        }
        *slot = total;
    }
    // weight[s] = s! (d - s - 1)! / d!
    let mut factorial = vec![1.0f64; d + 1];
    for k in 1..=d {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let weight: Vec<f64> = (0..d).map(|s| factorial[s] * factorial[d - s - 1] / factorial[d]).collect();
    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        for mask in 0..subsets {
            if mask & bit == 0 {
                let size = mask.count_ones() as usize;
                *p += weight[size] * (value[mask | bit] - value[mask]);
            }
        }
    }
    Ok(ShapVector { phi, base_value: value[0] })
}
