//! Top-k high-utility itemset mining over churned transactions, with feature
//! importance as unit profit.
//!
//! The utility of an itemset `P` is the sum, over every transaction that
//! contains all of `P`, of `quantity × profit` for each item of `P`. The
//! quantity is 1 in [`UtilityMode::Binary`] and the item's membership degree
//! in [`UtilityMode::Membership`].
//!
//! Results are totally ordered: utility descending, then fewer items, then
//! lexicographic order of the sorted item names. [`mine_topk`] is exact and
//! agrees element-for-element with [`brute_force_topk`].

mod beam;
mod brute;
mod topk;

pub use beam::mine_beam;
pub use brute::{brute_force_topk, ORACLE_MAX_ITEMS};
pub use topk::{mine_topk, remaining_utility_bound, search_order};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzify::BinaryFrame;
use crate::gbdt::ImportanceTable;

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("no churned rows to mine")]
    NoChurnRows,
    #[error("no importance score for column `{0}`")]
    MissingImportance(String),
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("itemset is empty")]
    EmptyItemset,
    #[error("transaction database is empty")]
    EmptyDatabase,
    #[error("{0} items exceed the brute-force oracle limit of {ORACLE_MAX_ITEMS}")]
    TooManyItemsForOracle(usize),
    #[error("invalid mining configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} frame rows but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("transaction database was built from split {found}, expected {expected}")]
    FingerprintMismatch { expected: String, found: String },
}

pub type Result<T> = std::result::Result<T, MinerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMode {
    #[default]
    Binary,
    Membership,
}

/// Unit profit per item name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitTable {
    pub profits: Vec<(String, f64)>,
}

impl ProfitTable {
    pub fn new(profits: Vec<(String, f64)>) -> Self {
        Self { profits }
    }

    pub fn get(&self, item: &str) -> Option<f64> {
        self.profits.iter().find(|(n, _)| n == item).map(|(_, p)| *p)
    }

    /// Profits aligned with the database's item order.
    pub(crate) fn aligned(&self, db: &TransactionDB) -> Result<Vec<f64>> {
        db.items
            .iter()
            .map(|n| self.get(n).ok_or_else(|| MinerError::UnknownItem(n.clone())))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { profits: self.profits.iter().map(|(n, p)| (n.clone(), p * factor)).collect() }
    }
}

/// Churned transactions over a fixed item list. Every item occurs in at
/// least one transaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionDB {
    pub items: Vec<String>,
    /// Per transaction: (item index, quantity), ascending item index.
    pub transactions: Vec<Vec<(u32, f64)>>,
    pub mode: UtilityMode,
    pub source_fingerprint: String,
}

impl TransactionDB {
    /// Builds a database, dropping items that occur in no transaction and
    /// transactions left empty. Binary mode forces every quantity to 1.
    pub fn new(
        items: Vec<String>,
        transactions: Vec<Vec<(u32, f64)>>,
        mode: UtilityMode,
        source_fingerprint: impl Into<String>,
    ) -> Self {
        let mut used = vec![false; items.len()];
        for t in &transactions {
            for &(i, _) in t {
                used[i as usize] = true;
            }
        }
        let mut remap = vec![u32::MAX; items.len()];
        let mut kept = Vec::new();
        for (i, name) in items.into_iter().enumerate() {
            if used[i] {
                remap[i] = kept.len() as u32;
                kept.push(name);
            }
        }
        let transactions = transactions
            .into_iter()
            .filter(|t| !t.is_empty())
            .map(|t| {
                let mut t: Vec<(u32, f64)> = t
                    .into_iter()
                    .map(|(i, q)| {
                        let q = if mode == UtilityMode::Binary { 1.0 } else { q };
                        (remap[i as usize], q)
                    })
                    .collect();
                t.sort_by_key(|&(i, _)| i);
                t
            })
            .collect();
        Self { items: kept, transactions, mode, source_fingerprint: source_fingerprint.into() }
    }

    pub fn item_index(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub(crate) fn quantity(&self, tid: usize, item: usize) -> Option<f64> {
        let t = &self.transactions[tid];
        t.binary_search_by_key(&(item as u32), |&(i, _)| i).ok().map(|p| t[p].1)
    }

    /// Transaction ids containing every listed item, ascending.
    pub(crate) fn tids_of(&self, items: &[usize]) -> Vec<usize> {
        (0..self.len())
            .filter(|&t| items.iter().all(|&i| self.quantity(t, i).is_some()))
            .collect()
    }

    /// Rejects a database that was not built from the expected split.
    pub fn ensure_source(&self, expected: &str) -> Result<()> {
        if self.source_fingerprint != expected {
            return Err(MinerError::FingerprintMismatch {
                expected: expected.to_string(),
                found: self.source_fingerprint.clone(),
            });
        }
        Ok(())
    }
}

/// A mined itemset. `items` is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub items: Vec<String>,
    pub utility: f64,
    pub support: usize,
}

/// Result order: higher utility first, then fewer items, then item names.
pub fn rank_cmp(a: &Pattern, b: &Pattern) -> Ordering {
    b.utility
        .total_cmp(&a.utility)
        .then(a.items.len().cmp(&b.items.len()))
        .then_with(|| a.items.cmp(&b.items))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    pub k: usize,
    pub min_length: usize,
    /// `None` means unbounded.
    pub max_length: Option<usize>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self { k: 5, min_length: 2, max_length: None }
    }
}

impl MiningConfig {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(MinerError::InvalidConfig("k must be positive".into()));
        }
        if self.min_length == 0 {
            return Err(MinerError::InvalidConfig("min_length must be positive".into()));
        }
        if let Some(m) = self.max_length {
            if m < self.min_length {
                return Err(MinerError::InvalidConfig("max_length below min_length".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn max_len(&self, n_items: usize) -> usize {
        self.max_length.unwrap_or(n_items).min(n_items)
    }
}

/// Builds churn-only transactions from a binary frame. Each item's profit
/// is its source column's importance; items with zero profit or with no
/// occurrence among churned rows are dropped.
pub fn build_transactions(
    frame: &BinaryFrame,
    labels: &[u8],
    importance: &ImportanceTable,
    mode: UtilityMode,
) -> Result<(TransactionDB, ProfitTable)> {
    if labels.len() != frame.n_rows() {
        return Err(MinerError::LengthMismatch(frame.n_rows(), labels.len()));
    }
    let mut profit = Vec::with_capacity(frame.items.len());
    for item in &frame.items {
        let p = importance
            .get(&item.column)
            .ok_or_else(|| MinerError::MissingImportance(item.column.clone()))?;
        profit.push(p);
    }
    let churn_rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == 1).collect();
    if churn_rows.is_empty() {
        return Err(MinerError::NoChurnRows);
    }
    let transactions: Vec<Vec<(u32, f64)>> = churn_rows
        .iter()
        .map(|&r| {
            frame.rows[r]
                .iter()
                .copied()
                .filter(|&(i, _)| profit[i as usize] > 0.0)
                .collect()
        })
        .collect();
    let names: Vec<String> = frame.items.iter().map(|i| i.name.clone()).collect();
    let db = TransactionDB::new(names, transactions, mode, frame.source_fingerprint.clone());
    let pt = ProfitTable::new(
        db.items
            .iter()
            .map(|n| {
                let i = frame.item_index(n).expect("db items come from the frame");
                (n.clone(), profit[i])
            })
            .collect(),
    );
    Ok((db, pt))
}

/// Resolves item names to sorted-by-name database indices.
fn resolve(db: &TransactionDB, items: &[impl AsRef<str>]) -> Result<(Vec<String>, Vec<usize>)> {
    if items.is_empty() {
        return Err(MinerError::EmptyItemset);
    }
    let mut names: Vec<String> = items.iter().map(|s| s.as_ref().to_string()).collect();
    names.sort();
    names.dedup();
    let idx = names
        .iter()
        .map(|n| db.item_index(n).ok_or_else(|| MinerError::UnknownItem(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok((names, idx))
}

/// Utility of an itemset given its supporting transactions. Items must be
/// in name order and `tids` ascending; every search path funnels through
/// here so equal itemsets get bit-identical utilities.
pub(crate) fn canonical_utility(db: &TransactionDB, profits: &[f64], items: &[usize], tids: &[usize]) -> f64 {
    match db.mode {
        UtilityMode::Binary => {
            let unit: f64 = items.iter().map(|&i| profits[i]).sum();
            tids.len() as f64 * unit
        }
        UtilityMode::Membership => tids
            .iter()
            .map(|&t| {
                items
                    .iter()
                    .map(|&i| db.quantity(t, i).unwrap_or(0.0) * profits[i])
                    .sum::<f64>()
            })
            .sum(),
    }
}

/// Utility and support of an itemset.
pub fn utility(db: &TransactionDB, pt: &ProfitTable, items: &[impl AsRef<str>]) -> Result<(f64, usize)> {
    let profits = pt.aligned(db)?;
    let (_, idx) = resolve(db, items)?;
    let tids = db.tids_of(&idx);
    Ok((canonical_utility(db, &profits, &idx, &tids), tids.len()))
}

/// Sorted, truncated collection of the best patterns seen so far.
pub(crate) struct TopK {
    k: usize,
    pub(crate) patterns: Vec<Pattern>,
}

impl TopK {
    pub(crate) fn new(k: usize) -> Self {
        Self { k, patterns: Vec::with_capacity(k + 1) }
    }

    /// Current admission threshold: the k-th utility once full.
    pub(crate) fn threshold(&self) -> f64 {
        if self.patterns.len() < self.k {
            f64::NEG_INFINITY
        } else {
            self.patterns[self.k - 1].utility
        }
    }

    pub(crate) fn offer(&mut self, p: Pattern) {
        let pos = self.patterns.partition_point(|q| rank_cmp(q, &p) == Ordering::Less);
        if pos >= self.k {
            return;
        }
        self.patterns.insert(pos, p);
        self.patterns.truncate(self.k);
    }
}

/// Slack added to pruning comparisons so that floating-point differences
/// between summation orders never discard a true member of the top k.
pub(crate) fn slack(threshold: f64) -> f64 {
    1e-9 * threshold.abs().max(1.0)
}

pub(crate) fn make_pattern(db: &TransactionDB, profits: &[f64], idx: &[usize], tids: &[usize]) -> Pattern {
    let mut by_name: Vec<usize> = idx.to_vec();
    by_name.sort_by(|&a, &b| db.items[a].cmp(&db.items[b]));
    Pattern {
        items: by_name.iter().map(|&i| db.items[i].clone()).collect(),
        utility: canonical_utility(db, profits, &by_name, tids),
        support: tids.len(),
    }
}

/// One JSON object per line: `{"items":[...],"utility":u,"support":s}`.
pub fn to_jsonl(patterns: &[Pattern]) -> String {
    patterns
        .iter()
        .map(|p| serde_json::to_string(p).expect("pattern serializes") + "\n")
        .collect()
}

pub fn from_jsonl(text: &str) -> std::result::Result<Vec<Pattern>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// Plain-text ranking table, utilities rounded to 4 decimals.
pub fn render_table(patterns: &[Pattern]) -> String {
    let rows: Vec<(String, String, String)> = patterns
        .iter()
        .map(|p| {
            let set = p.items.iter().map(|i| format!("\"{i}\"")).collect::<Vec<_>>().join(", ");
            (format!("{{{set}}}"), format!("{:.4}", p.utility), p.support.to_string())
        })
        .collect();
    let header = "Highly Associated Fuzzy Churn Patterns";
    let w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0).max(header.len());
    let mut out = format!("Top-{} highly associated fuzzy churn patterns\n", patterns.len());
    out += &format!("{:<4} | {:<w$} | {:>10} | {:>7}\n", "Rank", header, "Utility", "Support");
    out += &format!("{}-+-{}-+-{}-+-{}\n", "-".repeat(4), "-".repeat(w), "-".repeat(10), "-".repeat(7));
    for (i, (set, u, s)) in rows.iter().enumerate() {
        out += &format!("{:<4} | {:<w$} | {:>10} | {:>7}\n", i + 1, set, u, s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzify::{BinaryFrame, Item, ItemSource, Term};
    use crate::gbdt::{ImportanceMethod, ImportanceTable};

    fn item(name: &str, column: &str, term: Option<Term>) -> Item {
        Item {
            name: name.into(),
            column: column.into(),
            source: match term {
                Some(term) => ItemSource::Fuzzy { term },
                None => ItemSource::Categorical { value: name.rsplit('_').next().unwrap().into() },
            },
        }
    }

    /// The appendix's full 10-row one-hot table (before churn filtering),
    /// with its printed fuzzy labels and membership degrees.
    pub(crate) fn appendix_frame() -> BinaryFrame {
        let items = vec![
            item("SL_C", "SL", None),
            item("SL_N", "SL", None),
            item("SL_S", "SL", None),
            item("Age_L", "Age", Some(Term::L)),
            item("Age_M", "Age", Some(Term::M)),
            item("Age_H", "Age", Some(Term::H)),
            item("Spend_L", "Spend", Some(Term::L)),
            item("Spend_M", "Spend", Some(Term::M)),
            item("Spend_H", "Spend", Some(Term::H)),
        ];
        // (SL index, age item, age mu, spend item, spend mu, churn)
        let raw = [
            (1, 3, 0.97, 7, 0.97, 1), // A
            (2, 3, 0.99, 6, 0.99, 0), // B
            (1, 3, 0.99, 7, 1.0, 1),  // C
            (0, 4, 0.99, 8, 0.66, 0), // D
            (1, 5, 0.92, 6, 0.49, 1), // E
            (2, 4, 0.98, 8, 0.82, 0), // F
            (1, 4, 0.98, 7, 0.99, 1), // G
            (0, 5, 0.76, 6, 0.97, 0), // H
            (2, 3, 0.93, 7, 1.0, 1),  // I
            (1, 5, 0.97, 6, 0.99, 1), // J
        ];
        let rows = raw.iter().map(|&(s, a, am, p, pm, _)| vec![(s, 1.0), (a, am), (p, pm)]).collect();
        let labels = raw.iter().map(|r| r.5).collect();
        BinaryFrame::new(items, rows, labels, "appendix").unwrap()
    }

    pub(crate) fn appendix_importance() -> ImportanceTable {
        ImportanceTable::new(
            ImportanceMethod::External,
            vec![("SL".into(), 0.2), ("Age".into(), 0.5), ("Spend".into(), 0.3)],
        )
        .unwrap()
    }

    pub(crate) fn appendix_db(mode: UtilityMode) -> (TransactionDB, ProfitTable) {
        let f = appendix_frame();
        build_transactions(&f, &f.labels.clone(), &appendix_importance(), mode).unwrap()
    }

    #[test]
    fn appendix_transactions() {
        let (db, pt) = appendix_db(UtilityMode::Binary);
        assert_eq!(db.len(), 6);
        assert_eq!(db.items, ["SL_N", "SL_S", "Age_L", "Age_M", "Age_H", "Spend_L", "Spend_M"]);
        assert!(db.item_index("SL_C").is_none());
        assert!(db.item_index("Spend_H").is_none());
        assert_eq!(pt.get("Age_L"), Some(0.5));
        assert_eq!(pt.get("SL_N"), Some(0.2));
    }

    #[test]
    fn appendix_utilities() {
        let (db, pt) = appendix_db(UtilityMode::Binary);
        assert_eq!(utility(&db, &pt, &["Age_L", "Spend_M"]).unwrap(), (3.0 * (0.5 + 0.3), 3));
        let (u, s) = utility(&db, &pt, &["Age_L", "SL_N", "Spend_M"]).unwrap();
        assert_eq!(s, 2);
        assert!((u - 2.0).abs() < 1e-12);
        assert!(matches!(utility(&db, &pt, &["SL_C"]), Err(MinerError::UnknownItem(_))));
        assert_eq!(utility(&db, &pt, &["Age_L", "Age_H"]).unwrap(), (0.0, 0));
    }

    #[test]
    fn membership_utility() {
        let (db, pt) = appendix_db(UtilityMode::Membership);
        // A: 0.97*0.5 + 0.97*0.3, C: 0.99*0.5 + 1*0.3, I: 0.93*0.5 + 1*0.3
        let expected = (0.97 * 0.5 + 0.97 * 0.3) + (0.99 * 0.5 + 1.0 * 0.3) + (0.93 * 0.5 + 1.0 * 0.3);
        let (u, s) = utility(&db, &pt, &["Age_L", "Spend_M"]).unwrap();
        assert_eq!(s, 3);
        assert!((u - expected).abs() < 1e-12);
    }

    #[test]
    fn build_errors() {
        let f = appendix_frame();
        let zeros = vec![0u8; 10];
        assert!(matches!(
            build_transactions(&f, &zeros, &appendix_importance(), UtilityMode::Binary),
            Err(MinerError::NoChurnRows)
        ));
        let partial = ImportanceTable::new(ImportanceMethod::External, vec![("SL".into(), 1.0)]).unwrap();
        assert!(matches!(
            build_transactions(&f, &f.labels, &partial, UtilityMode::Binary),
            Err(MinerError::MissingImportance(c)) if c == "Age"
        ));
    }

    #[test]
    fn zero_importance_items_dropped() {
        let f = appendix_frame();
        let imp = ImportanceTable::new(
            ImportanceMethod::External,
            vec![("SL".into(), 0.0), ("Age".into(), 0.5), ("Spend".into(), 0.3)],
        )
        .unwrap();
        let (db, _) = build_transactions(&f, &f.labels, &imp, UtilityMode::Binary).unwrap();
        assert!(db.items.iter().all(|n| !n.starts_with("SL_")));
    }

    #[test]
    fn config_validation() {
        assert!(MiningConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(MiningConfig { min_length: 3, max_length: Some(2), ..Default::default() }.validate().is_err());
        assert!(MiningConfig::default().validate().is_ok());
    }

    #[test]
    fn jsonl_and_table() {
        let p = vec![Pattern { items: vec!["a".into(), "b".into()], utility: 3.0, support: 1 }];
        let s = to_jsonl(&p);
        assert_eq!(s, "{\"items\":[\"a\",\"b\"],\"utility\":3.0,\"support\":1}\n");
        assert_eq!(from_jsonl(&s).unwrap(), p);
        let t = render_table(&p);
        assert!(t.contains("{\"a\", \"b\"}"));
        assert!(t.contains("3.0000"));
    }
}
