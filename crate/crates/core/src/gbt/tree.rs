use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    /// Rows with `x[feature] < threshold` descend to `left`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { weight: f64 },
}

/// Binary regression tree stored as an arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Tree { nodes: vec![TreeNode::Leaf { weight }] }
    }

    /// Checks that every child index points forward and every node is
    /// reachable exactly once.
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Format("empty tree".into()));
        }
        let mut seen = vec![false; nodes.len()];
        seen[0] = true;
        for (i, node) in nodes.iter().enumerate() {
            if let TreeNode::Split { left, right, threshold, .. } = *node {
                if !threshold.is_finite() {
                    return Err(Error::Format(format!("node {i}: non-finite threshold")));
                }
                for c in [left, right] {
                    if c <= i || c >= nodes.len() || seen[c] {
                        return Err(Error::Format(format!("node {i}: bad child index {c}")));
                    }
                    seen[c] = true;
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Format(format!("node {i} is unreachable")));
        }
        Ok(Tree { nodes })
    }

    /// Same tree with the arena renumbered in preorder (left subtree first),
    /// the layout the text format reads back.
    pub fn into_preorder(self) -> Self {
        fn walk(src: &[TreeNode], i: usize, out: &mut Vec<TreeNode>) -> usize {
            let id = out.len();
            out.push(src[i].clone());
            if let TreeNode::Split { feature, threshold, left, right } = src[i] {
                let l = walk(src, left, out);
                let r = walk(src, right, out);
                out[id] = TreeNode::Split { feature, threshold, left: l, right: r };
            }
            id
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        walk(&self.nodes, 0, &mut out);
        Tree { nodes: out }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .max()
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if row[feature] < threshold { left } else { right };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump() -> Tree {
        Tree::from_nodes(vec![
            TreeNode::Split { feature: 1, threshold: 0.5, left: 1, right: 2 },
            TreeNode::Leaf { weight: -1.0 },
            TreeNode::Leaf { weight: 2.0 },
        ])
        .unwrap()
    }

    #[test]
    fn routes_on_strict_less_than() {
        let t = stump();
        assert_eq!(t.predict_row(&[9.0, 0.0]), -1.0);
        assert_eq!(t.predict_row(&[9.0, 0.5]), 2.0);
        assert_eq!((t.depth(), t.n_leaves(), t.max_feature()), (1, 2, Some(1)));
    }

    #[test]
    fn rejects_malformed_arenas() {
        let cyc = vec![TreeNode::Split { feature: 0, threshold: 0.0, left: 0, right: 1 }, TreeNode::Leaf { weight: 0.0 }];
        assert!(Tree::from_nodes(cyc).is_err());
        let orphan = vec![TreeNode::Leaf { weight: 0.0 }, TreeNode::Leaf { weight: 1.0 }];
        assert!(Tree::from_nodes(orphan).is_err());
        assert!(Tree::from_nodes(vec![]).is_err());
    }
}
