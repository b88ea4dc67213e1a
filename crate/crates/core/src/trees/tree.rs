use alloc::vec::Vec;

use crate::error::{input_err, Error, Result};

/// A node of a binary regression tree. Rows with `x[feature] < threshold`
/// go left. `cover` is the number of training rows that reached the node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize, cover: u64 },
    Leaf { value: f64, cover: u64 },
}

impl Node {
    pub fn cover(&self) -> u64 {
        match *self {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => cover,
        }
    }
}

/// Nodes stored by id; the root is node 0 and children always have larger
/// ids than their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let tree = Self { nodes };
        tree.validate()?;
        Ok(tree)
    }

    pub fn leaf(value: f64, cover: u64) -> Self {
        Self { nodes: alloc::vec![Node::Leaf { value, cover }] }
    }

    /// Checks shape and cover invariants: every non-root node has exactly one
    /// parent, child ids exceed parent ids, leaf values are finite,
    /// `cover(parent) == cover(left) + cover(right)` and `cover(root) >= 1`.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::ModelIntegrity("tree has no nodes".into()));
        }
        let mut parents = alloc::vec![0u8; n];
        for (id, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Split { threshold, left, right, cover, .. } => {
                    if left <= id || right <= id || left >= n || right >= n || left == right {
                        return Err(Error::ModelIntegrity(alloc::format!("node {id} has invalid children")));
                    }
                    if threshold.is_nan() {
                        return Err(Error::ModelIntegrity(alloc::format!("node {id} has NaN threshold")));
                    }
                    parents[left] += 1;
                    parents[right] += 1;
                    let child_cover = self.nodes[left].cover() + self.nodes[right].cover();
                    if child_cover != cover {
                        return Err(Error::ModelIntegrity(alloc::format!(
                            "node {id} cover {cover} != children {child_cover}"
                        )));
                    }
                }
                Node::Leaf { value, .. } => {
                    if !value.is_finite() {
                        return Err(Error::ModelIntegrity(alloc::format!("leaf {id} is not finite")));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::ModelIntegrity("nodes are not a single rooted tree".into()));
        }
        if self.nodes[0].cover() == 0 {
            return Err(Error::ModelIntegrity("root cover is zero".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_single_leaf(&self) -> bool {
        matches!(self.nodes[..], [Node::Leaf { .. }])
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split { feature, .. } => Some(feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn uses_feature(&self, f: usize) -> bool {
        self.nodes.iter().any(|n| matches!(*n, Node::Split { feature, .. } if feature == f))
    }

    pub fn depth(&self) -> usize {
        fn go(tree: &RegressionTree, id: usize) -> usize {
            match *tree.node(id) {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(tree, left).max(go(tree, right)),
            }
        }
        go(self, 0)
    }

    pub fn evaluate(&self, state: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if state[feature] < threshold { left } else { right };
                }
            }
        }
    }

    /// Cover-weighted mean leaf value, i.e. the expectation over the
    /// training distribution that reached the tree.
    pub fn expected_value(&self) -> f64 {
        let root = self.nodes[0].cover() as f64;
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { value, cover } => Some(value * cover as f64 / root),
                Node::Split { .. } => None,
            })
            .sum()
    }

    pub(crate) fn check_features(&self, dim: usize) -> Result<()> {
        match self.max_feature() {
            Some(f) if f >= dim => Err(input_err!("tree splits on feature {f} but d = {dim}")),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn stump() -> RegressionTree {
        RegressionTree::new(vec![
            Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 10 },
            Node::Leaf { value: -1.0, cover: 5 },
            Node::Leaf { value: 1.0, cover: 5 },
        ])
        .unwrap()
    }

    #[test]
    fn stump_routes_by_threshold() {
        let t = stump();
        assert_eq!(t.evaluate(&[1.0]), 1.0);
        assert_eq!(t.evaluate(&[0.0]), -1.0);
        assert_eq!(t.evaluate(&[0.5]), 1.0);
        assert_eq!(t.expected_value(), 0.0);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn cover_mismatch_rejected() {
        let bad = RegressionTree::new(vec![
            Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 9 },
            Node::Leaf { value: -1.0, cover: 5 },
            Node::Leaf { value: 1.0, cover: 5 },
        ]);
        assert!(matches!(bad, Err(Error::ModelIntegrity(_))));
    }

    #[test]
    fn dangling_and_shared_children_rejected() {
        let shared = RegressionTree::new(vec![
            Node::Split { feature: 0, threshold: 0.5, left: 1, right: 1, cover: 10 },
            Node::Leaf { value: -1.0, cover: 5 },
        ]);
        assert!(shared.is_err());
        let orphan = RegressionTree::new(vec![
            Node::Leaf { value: 0.0, cover: 1 },
            Node::Leaf { value: 0.0, cover: 1 },
        ]);
        assert!(orphan.is_err());
        assert!(RegressionTree::new(vec![Node::Leaf { value: f64::NAN, cover: 1 }]).is_err());
        assert!(RegressionTree::new(vec![Node::Leaf { value: 0.0, cover: 0 }]).is_err());
    }
}
