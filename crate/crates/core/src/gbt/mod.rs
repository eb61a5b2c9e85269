//! Gradient-boosted regression trees on second-order gradient statistics.
//!
//! Each round fits one tree to `(g, h)` at the current prediction with
//! squared loss `½(y − ŷ)²`, so `g = ŷ − y` and `h = 1`. A leaf holding
//! gradient sum `G` and hessian sum `H` gets weight `−G/(H + λ)`; a split
//! is kept when
//!
//! ```text
//! ½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ > 0
//! ```
//!
//! and both children carry at least `min_child_weight` hessian.

mod split;
mod tree;

use serde::{Deserialize, Serialize};

pub use split::{best_split, split_gain, Split};
pub use tree::TreeNode;

use crate::error::{Error, Result};

/// Borrowed row-major feature matrix.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    data: &'a [f64],
    cols: usize,
}

impl<'a> MatrixView<'a> {
    pub fn new(data: &'a [f64], cols: usize) -> Result<Self> {
        if cols == 0 || data.len() % cols != 0 {
            return Err(Error::Shape(format!(
                "{} values do not form rows of width {cols}",
                data.len()
            )));
        }
        Ok(Self { data, cols })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Initial prediction; the training-target mean when absent.
    #[serde(default)]
    pub base_score: Option<f64>,
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_estimators: 450,
            learning_rate: 0.01,
            max_depth: 3,
            min_child_weight: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            base_score: None,
        }
    }
}

pub const GBT_PRESETS: [&str; 3] = ["guoyang", "chaohu", "taoxi"];

impl GbtConfig {
    /// Per-station hyperparameters used for the water-level study.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "guoyang" => Ok(Self {
                n_estimators: 600,
                ..Self::default()
            }),
            "chaohu" | "taoxi" => Ok(Self::default()),
            other => Err(Error::Validation(format!(
                "unknown model preset `{other}` (expected one of {})",
                GBT_PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_estimators < 1 {
            return Err(Error::Validation("n_estimators must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Validation(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::Validation("max_depth must be at least 1".into()));
        }
        if !(self.min_child_weight >= 0.0) || !(self.lambda >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::Validation(
                "min_child_weight, lambda and gamma must be non-negative".into(),
            ));
        }
        if self.base_score.is_some_and(|b| !b.is_finite()) {
            return Err(Error::Validation("base_score must be finite".into()));
        }
        Ok(())
    }
}

/// First and second derivatives of `½(y − ŷ)²` with respect to `ŷ`.
pub fn gradient_stats(y: &[f64], yhat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if y.len() != yhat.len() {
        return Err(Error::Shape(format!(
            "targets have length {} but predictions have length {}",
            y.len(),
            yhat.len()
        )));
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite target or prediction".into()));
    }
    let g = y.iter().zip(yhat).map(|(t, p)| p - t).collect();
    Ok((g, vec![1.0; y.len()]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
}

impl GbtModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut acc = self.base_score;
        for tree in &self.trees {
            acc += self.learning_rate * tree.predict(row);
        }
        acc
    }

    pub fn predict(&self, x: MatrixView<'_>) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.cols()
            )));
        }
        Ok((0..x.rows()).map(|i| self.predict_row(x.row(i))).collect())
    }

    pub fn n_leaves(&self) -> usize {
        self.trees.iter().map(TreeNode::n_leaves).sum()
    }
}

/// Fits `config.n_estimators` trees. Deterministic in its inputs.
pub fn fit(x: MatrixView<'_>, y: &[f64], config: &GbtConfig) -> Result<GbtModel> {
    config.validate()?;
    let n = x.rows();
    if n == 0 {
        return Err(Error::Fit("cannot fit on zero rows".into()));
    }
    if y.len() != n {
        return Err(Error::Shape(format!("{n} feature rows but {} targets", y.len())));
    }
    if x.data.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("training data contains non-finite values".into()));
    }

    let base_score = config
        .base_score
        .unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let sorted = tree::presort(x);
    let mut yhat = vec![base_score; n];
    let mut trees = Vec::with_capacity(config.n_estimators);
    for _ in 0..config.n_estimators {
        let (g, h) = gradient_stats(y, &yhat)?;
        let tree = tree::grow(x, &g, &h, &sorted, config);
        for (i, p) in yhat.iter_mut().enumerate() {
            *p += config.learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
    }

    Ok(GbtModel {
        base_score,
        learning_rate: config.learning_rate,
        n_features: x.cols(),
        trees,
    })
}

/// Training predictions after each boosting round, for inspecting descent.
pub fn staged_predictions(model: &GbtModel, x: MatrixView<'_>) -> Vec<Vec<f64>> {
    let mut current = vec![model.base_score; x.rows()];
    let mut stages = Vec::with_capacity(model.trees.len());
    for tree in &model.trees {
        for (i, p) in current.iter_mut().enumerate() {
            *p += model.learning_rate * tree.predict(x.row(i));
        }
        stages.push(current.clone());
    }
    stages
}
