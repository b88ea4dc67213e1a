//! Path-dependent TreeSHAP.
//!
//! Exact Shapley values of a tree's output where absent features are
//! integrated out along each split in proportion to the training cover. The
//! recursion keeps, for the current root-to-node path, the set of distinct
//! features seen so far and the permutation weights of every subset size;
//! `extend` adds a feature to that set and `unwind` removes one, so the whole
//! computation is `O(leaves · depth²)` per tree.

use alloc::vec;
use alloc::vec::Vec;

use super::gbdt::GbdtModel;
use super::tree::{Node, RegressionTree};
use crate::error::{check_dim, input_err, Error, Result};

/// Attribution of one action's margin: `base_value + Σ phi == margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapVector {
    pub phi: Vec<f64>,
    pub base_value: f64,
}

impl ShapVector {
    pub fn total(&self) -> f64 {
        self.base_value + self.phi.iter().sum::<f64>()
    }
}

/// Feature slot used for the root path element, which belongs to no feature.
const NO_FEATURE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    /// Fraction of cover flowing this way when the feature is absent.
    zero_fraction: f64,
    /// 1 if the explained sample follows this way, else 0.
    one_fraction: f64,
    /// Permutation weight of subsets of the current size.
    weight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: usize) {
    let depth = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    });
    let denom = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one_fraction * path[i].weight * (i + 1) as f64 / denom;
        path[i].weight = zero_fraction * path[i].weight * (depth - i) as f64 / denom;
    }
}

/// Removes element `index` from the path, undoing its `extend`.
fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (depth + 1) as f64;
    let mut next_one_portion = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one_portion * denom / ((i + 1) as f64 * one);
            next_one_portion = tmp - path[i].weight * zero * (depth - i) as f64 / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

/// Total permutation weight the path would have with element `index`
/// removed, without modifying the path.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let denom = (depth + 1) as f64;
    let mut next_one_portion = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one_portion * denom / ((i + 1) as f64 * one);
            total += tmp;
            next_one_portion = path[i].weight - tmp * zero * (depth - i) as f64 / denom;
        } else {
            total += path[i].weight / zero * denom / (depth - i) as f64;
        }
    }
    total
}

struct Walker<'a> {
    tree: &'a RegressionTree,
    state: &'a [f64],
    phi: &'a mut [f64],
    scale: f64,
}

impl Walker<'_> {
    fn recurse(
        &mut self,
        node: usize,
        mut path: Vec<PathElement>,
        zero_fraction: f64,
        one_fraction: f64,
        feature: usize,
    ) -> Result<()> {
        extend(&mut path, zero_fraction, one_fraction, feature);
        match *self.tree.node(node) {
            Node::Leaf { value, .. } => {
                for i in 1..path.len() {
                    let el = path[i];
                    // (one - zero) == 0 contributes nothing; skipping also
                    // avoids dividing by a zero fraction below.
                    if el.one_fraction == el.zero_fraction {
                        continue;
                    }
                    let w = unwound_sum(&path, i);
                    self.phi[el.feature] += w * (el.one_fraction - el.zero_fraction) * value * self.scale;
                }
            }
            Node::Split { feature: split, threshold, left, right, cover } => {
                if cover == 0 {
                    return Err(Error::ModelIntegrity(alloc::format!("internal node {node} has zero cover")));
                }
                let (hot, cold) = if self.state[split] < threshold { (left, right) } else { (right, left) };
                let cover = cover as f64;
                let hot_zero = self.tree.node(hot).cover() as f64 / cover;
                let cold_zero = self.tree.node(cold).cover() as f64 / cover;
                let mut incoming_zero = 1.0;
                let mut incoming_one = 1.0;
                if let Some(k) = path.iter().skip(1).position(|el| el.feature == split).map(|k| k + 1) {
                    incoming_zero = path[k].zero_fraction;
                    incoming_one = path[k].one_fraction;
                    unwind(&mut path, k);
                }
                self.recurse(hot, path.clone(), hot_zero * incoming_zero, incoming_one, split)?;
                self.recurse(cold, path, cold_zero * incoming_zero, 0.0, split)?;
            }
        }
        Ok(())
    }
}

/// Adds `scale ×` the TreeSHAP values of one tree at `state` into `phi`.
pub fn tree_shap_single(tree: &RegressionTree, state: &[f64], scale: f64, phi: &mut [f64]) -> Result<()> {
    if tree.max_feature().is_some_and(|f| f >= state.len()) || phi.len() != state.len() {
        return Err(input_err!("tree/state/phi dimension mismatch"));
    }
    let depth = tree.depth();
    let mut walker = Walker { tree, state, phi, scale };
    walker.recurse(0, Vec::with_capacity(depth + 2), 1.0, 1.0, NO_FEATURE)
}

/// TreeSHAP of `action`'s margin, summed over its trees and scaled by the
/// learning rate. `base_value` is the margin expected under the cover
/// distribution (the value with no features known).
pub fn tree_shap(model: &GbdtModel, state: &[f64], action: usize) -> Result<ShapVector> {
    check_dim("state", model.n_features(), state.len())?;
    if action >= model.n_actions() {
        return Err(input_err!("action {action} out of range"));
    }
    let eta = model.learning_rate();
    let mut phi = vec![0.0; state.len()];
    let mut base_value = model.base_score()[action];
    for tree in model.trees(action) {
        tree_shap_single(tree, state, eta, &mut phi)?;
        base_value += eta * tree.expected_value();
    }
    Ok(ShapVector { phi, base_value })
}
