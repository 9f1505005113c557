use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{rows_of, BoostedModel, GbdtError, Result};
use crate::dataset::ColumnarDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMethod {
    /// Sum of regularized split gains per feature.
    Gain,
    /// Mean absolute per-row path attribution (Saabas).
    PathAttribution,
    /// Scores imported from a file.
    External,
}

/// Nonnegative per-feature scores; used as unit profits when mining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub method: ImportanceMethod,
    pub scores: Vec<(String, f64)>,
}

impl ImportanceTable {
    pub fn new(method: ImportanceMethod, scores: Vec<(String, f64)>) -> Result<Self> {
        for (feature, score) in &scores {
            if !(*score >= 0.0) || !score.is_finite() {
                return Err(GbdtError::NegativeScore { feature: feature.clone(), score: *score });
            }
        }
        if !scores.iter().any(|(_, s)| *s > 0.0) {
            return Err(GbdtError::AllZeroImportance);
        }
        Ok(Self { method, scores })
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.scores.iter().find(|(f, _)| f == feature).map(|(_, s)| *s)
    }

    /// Features whose score is exactly zero.
    pub fn zero_features(&self) -> Vec<&str> {
        self.scores.iter().filter(|(_, s)| *s == 0.0).map(|(f, _)| f.as_str()).collect()
    }

    /// Two-column `feature,score` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["feature", "score"]).expect("in-memory write");
        for (f, s) in &self.scores {
            w.write_record([f.as_str(), &s.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Per-feature sum of split gains.
pub fn gain_by_feature(model: &BoostedModel) -> Vec<f64> {
    let mut out = vec![0.0; model.feature_names.len()];
    for t in &model.trees {
        for n in 0..t.n_nodes() {
            if !t.is_leaf(n) {
                out[t.feature[n] as usize] += t.gain[n];
            }
        }
    }
    out
}

/// Sum of split gains over all nodes, accumulated in node order.
pub fn total_gain(model: &BoostedModel) -> f64 {
    model
        .trees
        .iter()
        .flat_map(|t| (0..t.n_nodes()).filter(|&n| !t.is_leaf(n)).map(move |n| t.gain[n]))
        .sum()
}

/// Path attribution for one row: returns the bias (base score plus every
/// tree's root expectation) and one contribution per feature. Each split on
/// the decision path credits its feature with the change in expected value
/// from parent to child, so `bias + Σ contributions` equals the margin.
pub fn contributions(model: &BoostedModel, row: &[f64]) -> (f64, Vec<f64>) {
    let mut bias = model.base_score;
    let mut contrib = vec![0.0; model.feature_names.len()];
    for t in &model.trees {
        let mut node = 0;
        bias += t.value[0];
        while !t.is_leaf(node) {
            let f = t.feature[node] as usize;
            let child = t.child(node, row[f]);
            contrib[f] += t.value[child] - t.value[node];
            node = child;
        }
    }
    (bias, contrib)
}

pub fn importance(
    model: &BoostedModel,
    train: &ColumnarDataset,
    method: ImportanceMethod,
) -> Result<ImportanceTable> {
    if model.trees.is_empty() {
        return Err(GbdtError::EmptyModel);
    }
    let scores = match method {
        ImportanceMethod::Gain => gain_by_feature(model),
        ImportanceMethod::PathAttribution => {
            model.check_schema(train)?;
            let rows = rows_of(&train.feature_matrix(), train.n_rows());
            let mut acc = vec![0.0; model.feature_names.len()];
            for r in &rows {
                let (_, c) = contributions(model, r);
                for (a, v) in acc.iter_mut().zip(c) {
                    *a += v.abs();
                }
            }
            acc.into_iter().map(|a| a / rows.len() as f64).collect()
        }
        ImportanceMethod::External => {
            return Err(GbdtError::ParseError(
                "external importance must be loaded from a file".into(),
            ))
        }
    };
    ImportanceTable::new(method, model.feature_names.iter().cloned().zip(scores).collect())
}

pub fn load_importance(path: impl AsRef<Path>) -> Result<ImportanceTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| GbdtError::ParseError(format!("{}: {e}", path.display())))?;
    parse_importance(&text)
}

/// Parses `feature,score` rows. A leading row whose score does not parse is
/// taken as a header.
pub fn parse_importance(text: &str) -> Result<ImportanceTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut scores = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| GbdtError::ParseError(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(GbdtError::ParseError(format!("line {}: expected 2 fields", i + 1)));
        }
        let score = match rec[1].parse::<f64>() {
            Ok(s) => s,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(GbdtError::ParseError(format!("line {}: bad score `{}`", i + 1, &rec[1])))
            }
        };
        if score < 0.0 {
            return Err(GbdtError::NegativeScore { feature: rec[0].to_string(), score });
        }
        scores.push((rec[0].to_string(), score));
    }
    if scores.is_empty() {
        return Err(GbdtError::ParseError("no importance rows".into()));
    }
    ImportanceTable::new(ImportanceMethod::External, scores)
}
