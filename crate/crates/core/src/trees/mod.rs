//! Gradient-boosted regression trees (the tree student) and exact
//! Shapley attributions over them.

mod brute;
mod gbdt;
mod shap;
mod tree;

pub use brute::{brute_shapley, MAX_BRUTE_FEATURES};
pub use gbdt::{fit_gbdt, FitWarning, GbdtFit, GbdtModel, GbdtParams};
pub use shap::{tree_shap, tree_shap_single, ShapVector};
pub use tree::{Node, RegressionTree};
