//! One-vs-rest logistic gradient boosting with exact greedy splits.

use alloc::vec;
use alloc::vec::Vec;

use super::tree::{Node, RegressionTree};
use crate::dataset::Dataset;
use crate::error::{check_dim, input_err, Result};
use crate::math::{argmax, ln, sigmoid};
use crate::model::QFunction;

/// Splits must improve the squared error by more than this.
const MIN_GAIN: f64 = 1e-12;
/// Class priors are clamped away from 0 and 1 before taking the logit.
const PRIOR_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self { rounds: 100, max_depth: 4, learning_rate: 0.1, min_leaf: 5 }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.max_depth == 0 || self.min_leaf == 0 {
            return Err(input_err!("rounds, max_depth and min_leaf must be positive"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(input_err!("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Per-action tree ensembles. `margin[a] = base_score[a] + η Σ tree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    trees: Vec<Vec<RegressionTree>>,
    learning_rate: f64,
    base_score: Vec<f64>,
    n_features: usize,
}

impl GbdtModel {
    pub fn new(
        trees: Vec<Vec<RegressionTree>>,
        learning_rate: f64,
        base_score: Vec<f64>,
        n_features: usize,
    ) -> Result<Self> {
        if trees.is_empty() || trees.len() != base_score.len() {
            return Err(input_err!("need one ensemble and base score per action"));
        }
        if trees.iter().any(Vec::is_empty) {
            return Err(input_err!("every action needs at least one tree"));
        }
        for tree in trees.iter().flatten() {
            tree.validate()?;
            tree.check_features(n_features)?;
        }
        Ok(Self { trees, learning_rate, base_score, n_features })
    }

    pub fn trees(&self, action: usize) -> &[RegressionTree] {
        &self.trees[action]
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn base_score(&self) -> &[f64] {
        &self.base_score
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_actions(&self) -> usize {
        self.trees.len()
    }

    pub fn predict_margin(&self, state: &[f64]) -> Result<Vec<f64>> {
        check_dim("state", self.n_features, state.len())?;
        Ok((0..self.n_actions()).map(|a| self.margin_unchecked(state, a)).collect())
    }

    pub(crate) fn margin_unchecked(&self, state: &[f64], action: usize) -> f64 {
        let sum: f64 = self.trees[action].iter().map(|t| t.evaluate(state)).sum();
        self.base_score[action] + self.learning_rate * sum
    }

    pub fn predict_action(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_margin(state)?))
    }
}

impl QFunction for GbdtModel {
    fn state_dim(&self) -> usize {
        self.n_features
    }

    fn action_count(&self) -> usize {
        self.n_actions()
    }

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.predict_margin(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitWarning {
    /// Every pair carries the same action; other actions get constant margins.
    DegenerateLabels { only_action: usize },
}

#[derive(Debug, Clone)]
pub struct GbdtFit {
    pub model: GbdtModel,
    pub warnings: Vec<FitWarning>,
}

/// Fits one logistic boosting ensemble per action on the dataset's
/// `(state, action)` pairs.
pub fn fit_gbdt(dataset: &Dataset, params: &GbdtParams) -> Result<GbdtFit> {
    params.validate()?;
    let n = dataset.len();
    let d = dataset.spec().state_dim;
    let actions = dataset.spec().action_count;
    let columns: Vec<Vec<f64>> = (0..d).map(|f| dataset.states().map(|s| s[f]).collect()).collect();
    // Per-feature row order, sorted once and filtered per node.
    let sorted: Vec<Vec<usize>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut warnings = Vec::new();
    let first = dataset.pairs()[0].action;
    if dataset.pairs().iter().all(|p| p.action == first) {
        warnings.push(FitWarning::DegenerateLabels { only_action: first });
    }

    let mut ensembles = Vec::with_capacity(actions);
    let mut base_score = Vec::with_capacity(actions);
    for action in 0..actions {
        let labels: Vec<f64> =
            dataset.pairs().iter().map(|p| if p.action == action { 1.0 } else { 0.0 }).collect();
        let prior = (labels.iter().sum::<f64>() / n as f64).clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
        let base = ln(prior / (1.0 - prior));
        let mut margins = vec![base; n];
        let mut trees = Vec::with_capacity(params.rounds);
        let mut residual = vec![0.0; n];
        for _ in 0..params.rounds {
            for i in 0..n {
                residual[i] = labels[i] - sigmoid(margins[i]);
            }
            let tree = TreeBuilder::new(&columns, &sorted, &residual, params).build();
            for (i, m) in margins.iter_mut().enumerate() {
                *m += params.learning_rate * tree.evaluate_row(&columns, i);
            }
            trees.push(tree.finish());
        }
        ensembles.push(trees);
        base_score.push(base);
    }
    let model = GbdtModel::new(ensembles, params.learning_rate, base_score, d)?;
    Ok(GbdtFit { model, warnings })
}

struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    sorted: &'a [Vec<usize>],
    target: &'a [f64],
    params: &'a GbdtParams,
    nodes: Vec<Node>,
    /// Scratch membership flags for the node being split.
    in_node: Vec<bool>,
}

struct BuiltTree {
    tree: RegressionTree,
}

impl BuiltTree {
    fn evaluate_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        let mut id = 0;
        loop {
            match *self.tree.node(id) {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if columns[feature][row] < threshold { left } else { right };
                }
            }
        }
    }

    fn finish(self) -> RegressionTree {
        self.tree
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> TreeBuilder<'a> {
    fn new(
        columns: &'a [Vec<f64>],
        sorted: &'a [Vec<usize>],
        target: &'a [f64],
        params: &'a GbdtParams,
    ) -> Self {
        let n = target.len();
        Self { columns, sorted, target, params, nodes: Vec::new(), in_node: vec![false; n] }
    }

    fn build(mut self) -> BuiltTree {
        let rows: Vec<usize> = (0..self.target.len()).collect();
        self.grow(&rows, 0);
        // Nodes are pushed in pre-order with children after parents.
        let tree = RegressionTree::new(self.nodes).expect("builder emits valid trees");
        BuiltTree { tree }
    }

    /// Returns the id of the subtree root built for `rows`.
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let cover = rows.len() as u64;
        let value = rows.iter().map(|&r| self.target[r]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value, cover });
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(rows) else {
            return id;
        };
        let col = &self.columns[split.feature];
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| col[r] < split.threshold);
        let left = self.grow(&left_rows, depth + 1);
        let right = self.grow(&right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right, cover };
        id
    }

    /// Exact greedy search over midpoints between consecutive distinct
    /// values. Gain is the reduction in squared error,
    /// `n_l n_r / n (mean_l - mean_r)^2`. Ties keep the first candidate
    /// found, i.e. the lowest feature and then the lowest threshold.
    fn best_split(&mut self, rows: &[usize]) -> Option<Split> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf;
        for &r in rows {
            self.in_node[r] = true;
        }
        let total: f64 = rows.iter().map(|&r| self.target[r]).sum();
        let mut best: Option<Split> = None;
        let mut ordered = Vec::with_capacity(n);
        for (feature, col) in self.columns.iter().enumerate() {
            ordered.clear();
            ordered.extend(self.sorted[feature].iter().copied().filter(|&r| self.in_node[r]));
            let mut left_sum = 0.0;
            for i in 1..n {
                left_sum += self.target[ordered[i - 1]];
                let lo = col[ordered[i - 1]];
                let hi = col[ordered[i]];
                if !(lo < hi) || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                let (nl, nr) = (i as f64, (n - i) as f64);
                let diff = left_sum / nl - (total - left_sum) / nr;
                let gain = nl * nr / n as f64 * diff * diff;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split { feature, threshold: midpoint(lo, hi), gain });
                }
            }
        }
        for &r in rows {
            self.in_node[r] = false;
        }
        best
    }
}

/// Midpoint that still separates `lo` (left, strictly below) from `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}
