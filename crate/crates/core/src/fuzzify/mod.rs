//! Normality-routed fuzzy discretization of numeric columns and one-hot
//! encoding into a binary item frame.

mod membership;
mod shapiro;

pub use membership::{
    fit_membership, gaussian_mu, triangular_mu, Family, FittedStats, FuzzyAssignment,
    MembershipFunctions, Shoulder, Term, TermFunction,
};
pub use shapiro::{shapiro_wilk, shapiro_wilk_alpha, NormalityResult, DEFAULT_ALPHA, MAX_SAMPLE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnData, ColumnKind, ColumnarDataset};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum FuzzifyError {
    #[error("sample too small for the normality test ({0} < 3)")]
    SampleTooSmall(usize),
    #[error("sample too large for the normality test ({0} > 5000)")]
    SampleTooLarge(usize),
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("degenerate column `{0}`: min equals max")]
    DegenerateColumn(String),
    #[error("non-finite value in column")]
    NonFinite,
    #[error("invalid triangle vertices ({0}, {1}, {2}); need a <= b <= c")]
    InvalidVertices(f64, f64, f64),
    #[error("nonpositive gaussian width {0}")]
    NonpositiveWidth(f64),
    #[error("no membership spec for numeric column `{0}`")]
    MissingSpec(String),
    #[error("membership specs were fitted on split {expected}, not {found}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
}

pub type Result<T> = std::result::Result<T, FuzzifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzifyOptions {
    pub alpha: f64,
    /// Seed for the subsample drawn when a column exceeds the normality
    /// test's 5000-value limit.
    pub subsample_seed: u64,
}

impl Default for FuzzifyOptions {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, subsample_seed: 0 }
    }
}

/// Membership functions of one column together with the normality decision
/// and the fingerprint of the split they were fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipSpec {
    pub column: String,
    pub normality: NormalityResult,
    pub alpha: f64,
    pub functions: MembershipFunctions,
    pub source_fingerprint: String,
}

impl MembershipSpec {
    pub fn family(&self) -> Family {
        self.functions.family
    }

    pub fn assign(&self, x: f64) -> FuzzyAssignment {
        self.functions.assign(x)
    }
}

pub fn assign_term(x: f64, spec: &MembershipSpec) -> FuzzyAssignment {
    spec.assign(x)
}

/// Tests normality and fits membership functions for one numeric column of
/// the training split.
pub fn fit_column(train: &ColumnarDataset, column: &str, opts: &FuzzifyOptions) -> Result<MembershipSpec> {
    let values = match train.column(column) {
        Some((_, ColumnData::Numeric(v))) => v,
        _ => return Err(FuzzifyError::MissingSpec(column.to_string())),
    };
    let stats = FittedStats::of(values);
    if values.len() < 3 {
        return Err(FuzzifyError::SampleTooSmall(values.len()));
    }
    if stats.min == stats.max {
        return Err(FuzzifyError::DegenerateColumn(column.to_string()));
    }
    let normality = if values.len() > MAX_SAMPLE {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        SplitMix64::new(opts.subsample_seed).shuffle(&mut idx);
        let sample: Vec<f64> = idx[..MAX_SAMPLE].iter().map(|&i| values[i]).collect();
        match shapiro_wilk_alpha(&sample, opts.alpha) {
            Ok(r) => r,
            // a constant subsample of a non-constant column is not Gaussian
            Err(FuzzifyError::ZeroVariance) => {
                NormalityResult { w_statistic: 0.0, p_value: 0.0, is_gaussian: false }
            }
            Err(e) => return Err(e),
        }
    } else {
        shapiro_wilk_alpha(values, opts.alpha)?
    };
    let functions = fit_membership(values, &normality).map_err(|e| match e {
        FuzzifyError::DegenerateColumn(_) => FuzzifyError::DegenerateColumn(column.to_string()),
        other => other,
    })?;
    Ok(MembershipSpec {
        column: column.to_string(),
        normality,
        alpha: opts.alpha,
        functions,
        source_fingerprint: train.fingerprint().to_string(),
    })
}

/// Fits every numeric column of the training split, in schema order.
pub fn fit_specs(train: &ColumnarDataset, opts: &FuzzifyOptions) -> Result<Vec<MembershipSpec>> {
    let numeric: Vec<String> = train
        .schema()
        .iter()
        .filter(|s| s.kind == ColumnKind::Numeric)
        .map(|s| s.name.clone())
        .collect();
    numeric.par_iter().map(|c| fit_column(train, c, opts)).collect()
}

/// What an item of the binary frame encodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ItemSource {
    Categorical { value: String },
    Fuzzy { term: Term },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    /// Source column; the item inherits this column's importance.
    pub column: String,
    pub source: ItemSource,
}

impl Item {
    pub fn categorical(column: &str, value: &str) -> Self {
        Self {
            name: format!("{column}={value}"),
            column: column.to_string(),
            source: ItemSource::Categorical { value: value.to_string() },
        }
    }

    pub fn fuzzy(column: &str, term: Term) -> Self {
        Self {
            name: format!("{column}_{}", term.suffix()),
            column: column.to_string(),
            source: ItemSource::Fuzzy { term },
        }
    }
}

/// One-hot item table. Rows are stored sparsely: each row lists the items it
/// contains (ascending item index) with their membership degrees; categorical
/// items carry membership 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryFrame {
    pub items: Vec<Item>,
    pub rows: Vec<Vec<(u32, f64)>>,
    pub labels: Vec<u8>,
    /// Fingerprint of the dataset rows the frame was built from.
    pub source_fingerprint: String,
}

impl BinaryFrame {
    /// Validates and assembles a frame. Row entries are sorted by item index.
    pub fn new(
        items: Vec<Item>,
        mut rows: Vec<Vec<(u32, f64)>>,
        labels: Vec<u8>,
        source_fingerprint: impl Into<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(FuzzifyError::MalformedFrame(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for row in &mut rows {
            row.sort_by_key(|&(i, _)| i);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(FuzzifyError::MalformedFrame(format!("duplicate item {}", w[0].0)));
                }
            }
            for &(i, m) in row.iter() {
                if i as usize >= items.len() || !(0.0..=1.0).contains(&m) {
                    return Err(FuzzifyError::MalformedFrame(format!("bad cell ({i}, {m})")));
                }
            }
        }
        Ok(Self { items, rows, labels, source_fingerprint: source_fingerprint.into() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn item_index(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|i| i.name == name)
    }

    pub fn contains(&self, row: usize, item: usize) -> bool {
        self.rows[row].binary_search_by_key(&(item as u32), |&(i, _)| i).is_ok()
    }

    pub fn membership(&self, row: usize, item: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&(item as u32), |&(i, _)| i)
            .map(|p| self.rows[row][p].1)
            .unwrap_or(0.0)
    }

    /// Dense 0/1 matrix, rows × items.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0u8; self.items.len()];
                for &(i, _) in r {
                    d[i as usize] = 1;
                }
                d
            })
            .collect()
    }

    /// 1 for every row containing all named items, else 0.
    pub fn indicator<S: AsRef<str>>(&self, items: &[S]) -> Result<Vec<u8>> {
        let idx = items
            .iter()
            .map(|n| self.item_index(n.as_ref()).ok_or_else(|| FuzzifyError::UnknownItem(n.as_ref().to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows())
            .map(|r| u8::from(idx.iter().all(|&i| self.contains(r, i))))
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frame serializes")
    }
}

/// One-hot encodes a dataset: categorical columns first (schema order, codes
/// in category-map order), then fuzzified numeric columns (schema order,
/// terms L, M, H).
pub fn to_binary_frame(ds: &ColumnarDataset, specs: &[MembershipSpec]) -> Result<BinaryFrame> {
    enum Block<'a> {
        Cat { first: usize, codes: &'a [u32] },
        Fuzzy { first: usize, values: &'a [f64], spec: &'a MembershipSpec },
    }

    let mut items = Vec::new();
    let mut blocks = Vec::new();
    for i in ds.feature_indices() {
        let (schema, data) = ds.column_at(i);
        if let (ColumnKind::Categorical, ColumnData::Categorical(codes)) = (schema.kind, data) {
            let first = items.len();
            for v in schema.category_map.as_deref().unwrap_or_default() {
                items.push(Item::categorical(&schema.name, v));
            }
            blocks.push(Block::Cat { first, codes });
        }
    }
    for i in ds.feature_indices() {
        let (schema, data) = ds.column_at(i);
        if let (ColumnKind::Numeric, ColumnData::Numeric(values)) = (schema.kind, data) {
            let spec = specs
                .iter()
                .find(|s| s.column == schema.name)
                .ok_or_else(|| FuzzifyError::MissingSpec(schema.name.clone()))?;
            let first = items.len();
            for t in Term::ALL {
                items.push(Item::fuzzy(&schema.name, t));
            }
            blocks.push(Block::Fuzzy { first, values, spec });
        }
    }

    let rows = (0..ds.n_rows())
        .map(|r| {
            blocks
                .iter()
                .map(|b| match b {
                    Block::Cat { first, codes } => ((first + codes[r] as usize) as u32, 1.0),
                    Block::Fuzzy { first, values, spec } => {
                        let a = spec.assign(values[r]);
                        ((first + a.term as usize) as u32, a.membership)
                    }
                })
                .collect()
        })
        .collect();
    BinaryFrame::new(items, rows, ds.label().to_vec(), ds.fingerprint())
}
