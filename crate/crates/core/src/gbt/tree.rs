use serde::{Deserialize, Serialize};

use super::split::best_split_sorted;
use super::{GbtConfig, MatrixView};

/// A regression tree serialized as nested nodes:
/// `{"leaf": w}` or `{"feature", "threshold", "left", "right"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf {
        leaf: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Row indices sorted by each feature, computed once per fit.
pub(crate) fn presort(x: MatrixView<'_>) -> Vec<Vec<usize>> {
    (0..x.cols())
        .map(|f| {
            let mut o: Vec<usize> = (0..x.rows()).collect();
            o.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            o
        })
        .collect()
}

pub(crate) fn grow(x: MatrixView<'_>, g: &[f64], h: &[f64], sorted: &[Vec<usize>], config: &GbtConfig) -> TreeNode {
    let mut goes_left = vec![false; x.rows()];
    grow_node(x, g, h, sorted.to_vec(), 0, config, &mut goes_left)
}

fn leaf(orders: &[Vec<usize>], g: &[f64], h: &[f64], lambda: f64) -> TreeNode {
    let rows = &orders[0];
    let g_sum: f64 = rows.iter().map(|&i| g[i]).sum();
    let h_sum: f64 = rows.iter().map(|&i| h[i]).sum();
    let w = -g_sum / (h_sum + lambda);
    // -0.0 from a zero gradient sum would print as "-0" in model files.
    TreeNode::Leaf { leaf: if w == 0.0 { 0.0 } else { w } }
}

fn grow_node(
    x: MatrixView<'_>,
    g: &[f64],
    h: &[f64],
    orders: Vec<Vec<usize>>,
    depth: usize,
    config: &GbtConfig,
    goes_left: &mut [bool],
) -> TreeNode {
    if depth >= config.max_depth {
        return leaf(&orders, g, h, config.lambda);
    }
    let Some(split) = best_split_sorted(x, g, h, &orders, config) else {
        return leaf(&orders, g, h, config.lambda);
    };

    for &i in &orders[0] {
        goes_left[i] = x.get(i, split.feature) < split.threshold;
    }
    let (left, right): (Vec<Vec<usize>>, Vec<Vec<usize>>) = orders
        .iter()
        .map(|o| o.iter().partition::<Vec<usize>, _>(|&&i| goes_left[i]))
        .unzip();
    drop(orders);

    let left = grow_node(x, g, h, left, depth + 1, config, goes_left);
    let right = grow_node(x, g, h, right, depth + 1, config, goes_left);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}
