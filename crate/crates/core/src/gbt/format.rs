//! Line-oriented text format. Floats are written in shortest round-trip form
//! so a reloaded ensemble predicts bit-identically.
//!
//! ```text
//! attnae-gbt 1
//! config {json}
//! n_features 179
//! base_score 3.52...
//! trees 1900
//! S3:0.5 L-0.01 L0.02
//! ```
//!
//! Each tree line lists its nodes in preorder: `S<feature>:<threshold>` for a
//! split (left subtree first) and `L<weight>` for a leaf.

use super::config::GbtConfig;
use super::ensemble::GbtEnsemble;
use super::tree::{Tree, TreeNode};
use crate::error::{Error, Result};

const MAGIC: &str = "attnae-gbt 1";

pub fn to_text(model: &GbtEnsemble) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("config {}\n", serde_json::to_string(&model.config).expect("config serializes")));
    out.push_str(&format!("n_features {}\n", model.n_features));
    out.push_str(&format!("base_score {}\n", model.base_score));
    out.push_str(&format!("trees {}\n", model.trees.len()));
    for tree in &model.trees {
        let mut tokens = Vec::new();
        write_preorder(tree.nodes(), 0, &mut tokens);
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

fn write_preorder(nodes: &[TreeNode], i: usize, out: &mut Vec<String>) {
    match nodes[i] {
        TreeNode::Leaf { weight } => out.push(format!("L{weight}")),
        TreeNode::Split { feature, threshold, left, right } => {
            out.push(format!("S{feature}:{threshold}"));
            write_preorder(nodes, left, out);
            write_preorder(nodes, right, out);
        }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Format(format!("line {line}: {}", msg.into()))
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .map(|v| (no, v))
        .ok_or_else(|| bad(no, format!("expected `{key}`")))
}

fn float(no: usize, s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| bad(no, format!("bad number `{s}`")))
}

pub fn from_text(text: &str) -> Result<GbtEnsemble> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(Error::Format("not an attnae-gbt 1 file".into())),
    }
    let (no, json) = header(&mut lines, "config")?;
    let config: GbtConfig = serde_json::from_str(json).map_err(|e| bad(no, e.to_string()))?;
    let (no, v) = header(&mut lines, "n_features")?;
    let n_features: usize = v.parse().map_err(|_| bad(no, "bad feature count"))?;
    let (no, v) = header(&mut lines, "base_score")?;
    let base_score = float(no, v)?;
    let (no, v) = header(&mut lines, "trees")?;
    let n_trees: usize = v.parse().map_err(|_| bad(no, "bad tree count"))?;

    let mut trees = Vec::with_capacity(n_trees);
    for (no, line) in lines.by_ref().take(n_trees) {
        let tokens: Vec<&str> = line.split(' ').collect();
        let mut nodes = Vec::new();
        let mut pos = 0;
        read_preorder(&tokens, &mut pos, &mut nodes, no, 0)?;
        if pos != tokens.len() {
            return Err(bad(no, "trailing tokens"));
        }
        let tree = Tree::from_nodes(nodes).map_err(|e| bad(no, e.to_string()))?;
        if tree.max_feature().is_some_and(|f| f >= n_features) {
            return Err(bad(no, "feature index out of range"));
        }
        trees.push(tree);
    }
    if trees.len() != n_trees {
        return Err(Error::Format(format!("expected {n_trees} trees, found {}", trees.len())));
    }
    if lines.any(|(_, l)| !l.is_empty()) {
        return Err(Error::Format("content after the last tree".into()));
    }
    Ok(GbtEnsemble { config, n_features, base_score, trees })
}

const MAX_DEPTH: usize = 256;

fn read_preorder(tokens: &[&str], pos: &mut usize, nodes: &mut Vec<TreeNode>, no: usize, depth: usize) -> Result<usize> {
    if depth > MAX_DEPTH {
        return Err(bad(no, "tree too deep"));
    }
    let tok = *tokens.get(*pos).ok_or_else(|| bad(no, "truncated tree"))?;
    *pos += 1;
    let id = nodes.len();
    if let Some(w) = tok.strip_prefix('L') {
        nodes.push(TreeNode::Leaf { weight: float(no, w)? });
    } else if let Some(rest) = tok.strip_prefix('S') {
        let (f, t) = rest.split_once(':').ok_or_else(|| bad(no, format!("bad split `{tok}`")))?;
        let feature = f.parse().map_err(|_| bad(no, format!("bad split `{tok}`")))?;
        let threshold = float(no, t)?;
        nodes.push(TreeNode::Leaf { weight: 0.0 });
        let left = read_preorder(tokens, pos, nodes, no, depth + 1)?;
        let right = read_preorder(tokens, pos, nodes, no, depth + 1)?;
        nodes[id] = TreeNode::Split { feature, threshold, left, right };
    } else {
        return Err(bad(no, format!("bad token `{tok}`")));
    }
    Ok(id)
}
