//! Gradient-boosted regression trees for binary churn classification.
//!
//! Trees are grown with exact greedy split search over the sorted unique
//! values of every feature, using first and second order gradients of the
//! logistic loss. Categorical columns enter as their integer codes.

mod importance;
mod metrics;

pub use importance::{
    contributions, gain_by_feature, importance, load_importance, parse_importance, total_gain,
    ImportanceMethod, ImportanceTable,
};
pub use metrics::{evaluate, roc_auc, Metrics};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ColumnarDataset;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("feature schema mismatch: model expects {expected:?}, dataset has {found:?}")]
    SchemaMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("length mismatch: {0} labels vs {1} scores")]
    LengthMismatch(usize, usize),
    #[error("AUC undefined: only one class present")]
    DegenerateAuc,
    #[error("model has no trees")]
    EmptyModel,
    #[error("negative importance score {score} for `{feature}`")]
    NegativeScore { feature: String, score: f64 },
    #[error("importance parse error: {0}")]
    ParseError(String),
    #[error("every importance score is zero")]
    AllZeroImportance,
    #[error("invalid boosting parameter: {0}")]
    InvalidParams(String),
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GbdtError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub min_child_weight: f64,
    pub lambda_l2: f64,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            learning_rate: 0.3,
            n_estimators: 100,
            min_child_weight: 1.0,
            lambda_l2: 1.0,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(GbdtError::InvalidParams("max_depth must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(GbdtError::InvalidParams("learning_rate must lie in (0, 1]".into()));
        }
        if self.n_estimators == 0 {
            return Err(GbdtError::InvalidParams("n_estimators must be positive".into()));
        }
        if !(self.min_child_weight >= 0.0) || !(self.lambda_l2 >= 0.0) {
            return Err(GbdtError::InvalidParams(
                "min_child_weight and lambda_l2 must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// One regression tree in flat array form. Node 0 is the root; a node is a
/// leaf when `left[i] < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<u32>,
    pub threshold: Vec<f64>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
    /// Leaf output for leaves; row-weighted mean of the subtree's leaf
    /// outputs for internal nodes.
    pub value: Vec<f64>,
    pub gain: Vec<f64>,
    pub cover: Vec<f64>,
    pub count: Vec<u32>,
}

impl Tree {
    fn with_capacity(n: usize) -> Self {
        Self {
            feature: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            value: Vec::with_capacity(n),
            gain: Vec::with_capacity(n),
            cover: Vec::with_capacity(n),
            count: Vec::with_capacity(n),
        }
    }

    /// A tree consisting of one leaf.
    pub fn leaf(weight: f64) -> Self {
        Self {
            feature: vec![0],
            threshold: vec![0.0],
            left: vec![-1],
            right: vec![-1],
            value: vec![weight],
            gain: vec![0.0],
            cover: vec![0.0],
            count: vec![0],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.left.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.left[node] < 0
    }

    /// Child reached from `node` by a row whose split feature equals `x`.
    #[inline]
    pub fn child(&self, node: usize, x: f64) -> usize {
        if x < self.threshold[node] {
            self.left[node] as usize
        } else {
            self.right[node] as usize
        }
    }

    pub fn leaf_for(&self, row: &[f64]) -> usize {
        let mut node = 0;
        while !self.is_leaf(node) {
            node = self.child(node, row[self.feature[node] as usize]);
        }
        node
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.value[self.leaf_for(row)]
    }
}

pub const MODEL_FORMAT: &str = "hafcp-gbdt";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub format: String,
    pub version: u32,
    pub params: BoostParams,
    /// Log-odds prior added to every margin.
    pub base_score: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

impl BoostedModel {
    pub fn new(params: BoostParams, base_score: f64, feature_names: Vec<String>, trees: Vec<Tree>) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            params,
            base_score,
            feature_names,
            trees,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        let nf = m.feature_names.len() as u32;
        for t in &m.trees {
            for i in 0..t.n_nodes() {
                if !t.is_leaf(i) && t.feature[i] >= nf {
                    return Err(GbdtError::InvalidParams(format!(
                        "node feature index {} out of range",
                        t.feature[i]
                    )));
                }
                if !t.value[i].is_finite() {
                    return Err(GbdtError::InvalidParams("non-finite node value".into()));
                }
            }
        }
        Ok(m)
    }

    /// Raw additive score (log-odds) for one row of feature values.
    pub fn margin_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().fold(self.base_score, |acc, t| acc + t.predict_row(row))
    }

    pub fn check_schema(&self, ds: &ColumnarDataset) -> Result<()> {
        let found = ds.feature_names();
        if found != self.feature_names {
            return Err(GbdtError::SchemaMismatch { expected: self.feature_names.clone(), found });
        }
        Ok(())
    }

    pub fn predict_margin(&self, ds: &ColumnarDataset) -> Result<Vec<f64>> {
        self.check_schema(ds)?;
        Ok(rows_of(&ds.feature_matrix(), ds.n_rows())
            .iter()
            .map(|r| self.margin_row(r))
            .collect())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Row-major copy of a column-major feature matrix.
pub fn rows_of(cols: &[Vec<f64>], n_rows: usize) -> Vec<Vec<f64>> {
    (0..n_rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

pub fn predict_proba(model: &BoostedModel, ds: &ColumnarDataset) -> Result<Vec<f64>> {
    Ok(model.predict_margin(ds)?.into_iter().map(sigmoid).collect())
}

/// Mean logistic loss of raw margins against binary labels.
pub fn log_loss(labels: &[u8], margins: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(margins)
        .map(|(&y, &m)| {
            // log(1 + e^m) - y*m, computed stably
            let softplus = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
            softplus - y as f64 * m
        })
        .sum();
    total / labels.len() as f64
}

pub fn train(train: &ColumnarDataset, params: &BoostParams) -> Result<BoostedModel> {
    train_traced(train, params).map(|(m, _)| m)
}

/// Trains and also returns the training log-loss before the first round
/// followed by the loss after every round.
pub fn train_traced(train: &ColumnarDataset, params: &BoostParams) -> Result<(BoostedModel, Vec<f64>)> {
    params.validate()?;
    let labels = train.label();
    if labels.is_empty() {
        return Err(GbdtError::EmptyTrainingSet);
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(GbdtError::SingleClassTraining);
    }
    let rate = positives as f64 / labels.len() as f64;
    let base_score = (rate / (1.0 - rate)).ln();
    let columns = train.feature_matrix();
    let rows = rows_of(&columns, labels.len());

    let mut margins = vec![base_score; labels.len()];
    let mut losses = Vec::with_capacity(params.n_estimators + 1);
    losses.push(log_loss(labels, &margins));
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut grad = vec![0.0; labels.len()];
    let mut hess = vec![0.0; labels.len()];

    for _ in 0..params.n_estimators {
        for (i, (&y, &m)) in labels.iter().zip(&margins).enumerate() {
            let p = sigmoid(m);
            grad[i] = p - y as f64;
            hess[i] = p * (1.0 - p);
        }
        let grower = Grower { columns: &columns, grad: &grad, hess: &hess, params };
        let tree = grower.grow();
        for (m, row) in margins.iter_mut().zip(&rows) {
            *m += tree.predict_row(row);
        }
        losses.push(log_loss(labels, &margins));
        trees.push(tree);
    }

    Ok((BoostedModel::new(params.clone(), base_score, train.feature_names(), trees), losses))
}

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a BoostParams,
}

impl Grower<'_> {
    fn grow(&self) -> Tree {
        let mut tree = Tree::with_capacity(64);
        let rows: Vec<usize> = (0..self.grad.len()).collect();
        self.grow_node(&mut tree, rows, 0);
        tree
    }

    fn grow_node(&self, tree: &mut Tree, rows: Vec<usize>, depth: usize) -> usize {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let id = tree.n_nodes();
        tree.feature.push(0);
        tree.threshold.push(0.0);
        tree.left.push(-1);
        tree.right.push(-1);
        tree.value.push(0.0);
        tree.gain.push(0.0);
        tree.cover.push(h);
        tree.count.push(rows.len() as u32);

        let split = if depth < self.params.max_depth && rows.len() >= 2 {
            self.best_split(&rows, g, h)
        } else {
            None
        };

        match split {
            Some(s) => {
                let col = &self.columns[s.feature];
                let (lrows, rrows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| col[r] < s.threshold);
                let (nl, nr) = (lrows.len() as f64, rrows.len() as f64);
                let l = self.grow_node(tree, lrows, depth + 1);
                let r = self.grow_node(tree, rrows, depth + 1);
                tree.feature[id] = s.feature as u32;
                tree.threshold[id] = s.threshold;
                tree.left[id] = l as i32;
                tree.right[id] = r as i32;
                tree.gain[id] = s.gain;
                tree.value[id] = (nl * tree.value[l] + nr * tree.value[r]) / (nl + nr);
            }
            None => {
                tree.value[id] = -g / (h + self.params.lambda_l2) * self.params.learning_rate;
            }
        }
        id
    }

    /// Best split over all features. Ties keep the lowest feature index and,
    /// within a feature, the lowest threshold.
    fn best_split(&self, rows: &[usize], g: f64, h: f64) -> Option<SplitCandidate> {
        let per_feature: Vec<Option<SplitCandidate>> = if rows.len() >= 512 {
            (0..self.columns.len())
                .into_par_iter()
                .map(|f| self.best_split_on(f, rows, g, h))
                .collect()
        } else {
            (0..self.columns.len()).map(|f| self.best_split_on(f, rows, g, h)).collect()
        };
        let mut best: Option<SplitCandidate> = None;
        for c in per_feature.into_iter().flatten() {
            if best.is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        best
    }

    fn best_split_on(&self, feature: usize, rows: &[usize], g: f64, h: f64) -> Option<SplitCandidate> {
        let col = &self.columns[feature];
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let lambda = self.params.lambda_l2;
        let mcw = self.params.min_child_weight;
        let parent = g * g / (h + lambda);

        let mut gl = 0.0;
        let mut hl = 0.0;
        let mut best: Option<SplitCandidate> = None;
        for w in 0..order.len() - 1 {
            let r = order[w];
            gl += self.grad[r];
            hl += self.hess[r];
            let (lo, hi) = (col[r], col[order[w + 1]]);
            if lo == hi {
                continue;
            }
            let (gr, hr) = (g - gl, h - hl);
            if hl < mcw || hr < mcw {
                continue;
            }
            let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if !(threshold > lo) {
                    threshold = hi;
                }
                best = Some(SplitCandidate { feature, threshold, gain });
            }
        }
        best
    }
}
