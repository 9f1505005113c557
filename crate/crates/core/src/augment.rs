//! Mined patterns as engineered features: indicator columns, retraining and
//! the baseline-versus-augmented comparison report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnarDataset, DatasetError};
use crate::fuzzify::{to_binary_frame, FuzzifyError, MembershipSpec};
use crate::gbdt::{self, evaluate, predict_proba, BoostParams, GbdtError, Metrics};
use crate::miner::Pattern;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("pattern item `{0}` cannot be resolved from the dataset columns")]
    UnresolvableItem(String),
    #[error("membership specs were fitted on {found}, not on the training split {expected}")]
    Leakage { expected: String, found: String },
    #[error("report needs at least one augmented row")]
    EmptyReport,
    #[error(transparent)]
    Fuzzify(FuzzifyError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Gbdt(#[from] GbdtError),
}

impl From<FuzzifyError> for AugmentError {
    fn from(e: FuzzifyError) -> Self {
        match e {
            FuzzifyError::UnknownItem(i) => AugmentError::UnresolvableItem(i),
            other => AugmentError::Fuzzify(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, AugmentError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternFeature {
    pub pattern: Pattern,
    pub column_name: String,
    pub values: Vec<u8>,
}

pub fn feature_name(rank: usize) -> String {
    format!("HAFCP_{rank}")
}

/// Indicator of the pattern over `ds`, computed from the one-hot/fuzzy
/// representation under the given (train-fitted) specs.
pub fn pattern_feature(
    pattern: &Pattern,
    rank: usize,
    ds: &ColumnarDataset,
    specs: &[MembershipSpec],
) -> Result<PatternFeature> {
    let frame = to_binary_frame(ds, specs)?;
    let values = frame.indicator(&pattern.items)?;
    Ok(PatternFeature { pattern: pattern.clone(), column_name: feature_name(rank), values })
}

pub fn append_feature(ds: &ColumnarDataset, f: &PatternFeature) -> Result<ColumnarDataset> {
    let values = f.values.iter().map(|&v| v as f64).collect();
    Ok(ds.with_numeric_column(&f.column_name, values)?)
}

fn ensure_train_specs(train: &ColumnarDataset, specs: &[MembershipSpec]) -> Result<()> {
    for s in specs {
        if s.source_fingerprint != train.fingerprint() {
            return Err(AugmentError::Leakage {
                expected: train.fingerprint().to_string(),
                found: s.source_fingerprint.clone(),
            });
        }
    }
    Ok(())
}

pub fn baseline_metrics(train: &ColumnarDataset, test: &ColumnarDataset, params: &BoostParams) -> Result<Metrics> {
    let model = gbdt::train(train, params)?;
    Ok(evaluate(test.label(), &predict_proba(&model, test)?, 0.5)?)
}

/// Appends one indicator column per pattern (named `HAFCP_<rank>`) to both
/// splits, retrains with the same parameters and scores the test split.
pub fn evaluate_with_patterns(
    train: &ColumnarDataset,
    test: &ColumnarDataset,
    specs: &[MembershipSpec],
    patterns: &[(usize, &Pattern)],
    params: &BoostParams,
) -> Result<Metrics> {
    ensure_train_specs(train, specs)?;
    let mut tr = train.clone();
    let mut te = test.clone();
    for &(rank, p) in patterns {
        tr = append_feature(&tr, &pattern_feature(p, rank, train, specs)?)?;
        te = append_feature(&te, &pattern_feature(p, rank, test, specs)?)?;
    }
    baseline_metrics(&tr, &te, params)
}

pub fn evaluate_with_pattern(
    train: &ColumnarDataset,
    test: &ColumnarDataset,
    specs: &[MembershipSpec],
    pattern: &Pattern,
    rank: usize,
    params: &BoostParams,
) -> Result<Metrics> {
    evaluate_with_patterns(train, test, specs, &[(rank, pattern)], params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Improved,
    Equal,
    Worse,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Compares at 4-decimal granularity.
pub fn flag(value: f64, baseline: f64) -> Flag {
    let (v, b) = (round4(value), round4(baseline));
    if v > b {
        Flag::Improved
    } else if v < b {
        Flag::Worse
    } else {
        Flag::Equal
    }
}

fn flags(m: &Metrics, baseline: &Metrics) -> [Flag; 5] {
    let (v, b) = (m.values(), baseline.values());
    std::array::from_fn(|i| flag(v[i], b[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub metrics: Metrics,
    pub flags: [Flag; 5],
}

/// Provenance embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub config_fingerprint: String,
    pub seed: u64,
    pub params: BoostParams,
    pub k: usize,
    pub cumulative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub provenance: ReportProvenance,
    pub baseline: Metrics,
    pub per_pattern: Vec<ReportRow>,
    pub average: Metrics,
    pub average_flags: [Flag; 5],
    /// Externally supplied reference rows (e.g. results of other models).
    #[serde(default)]
    pub external: Vec<(String, Metrics)>,
}

/// Mean that returns the common value exactly when all inputs agree.
fn stable_mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = xs.clone();
    let first = it.next().expect("nonempty");
    let n = xs.clone().count() as f64;
    first + xs.map(|x| x - first).sum::<f64>() / n
}

pub fn build_report(
    baseline: Metrics,
    augmented: &[(usize, Metrics)],
    provenance: ReportProvenance,
) -> Result<ComparisonReport> {
    if augmented.is_empty() {
        return Err(AugmentError::EmptyReport);
    }
    let per_pattern: Vec<ReportRow> = augmented
        .iter()
        .map(|&(index, metrics)| ReportRow { index, metrics, flags: flags(&metrics, &baseline) })
        .collect();
    let average = Metrics::from_values(std::array::from_fn(|i| {
        stable_mean(augmented.iter().map(move |(_, m)| m.values()[i]))
    }));
    Ok(ComparisonReport {
        provenance,
        baseline,
        average_flags: flags(&average, &baseline),
        per_pattern,
        average,
        external: Vec::new(),
    })
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Metrics as rows; columns are external references, Baseline,
    /// Top-1..Top-k and AVG. Improved cells are bold.
    pub fn to_markdown(&self) -> String {
        let mut header = vec!["Metric".to_string()];
        header.extend(self.external.iter().map(|(n, _)| n.clone()));
        header.push("Baseline".into());
        header.extend(self.per_pattern.iter().map(|r| format!("Top-{}", r.index)));
        header.push("AVG".into());

        let cell = |v: f64, f: Flag| {
            let s = format!("{:.4}", v);
            if f == Flag::Improved {
                format!("**{s}**")
            } else {
                s
            }
        };
        let mut out = format!(
            "<!-- config fingerprint: {} -->\n\n",
            self.provenance.config_fingerprint
        );
        out += &format!("| {} |\n", header.join(" | "));
        out += &format!("|{}\n", "---|".repeat(header.len()));
        for (i, name) in Metrics::NAMES.iter().enumerate() {
            let mut row = vec![name.to_string()];
            row.extend(self.external.iter().map(|(_, m)| format!("{:.4}", m.values()[i])));
            row.push(format!("{:.4}", self.baseline.values()[i]));
            row.extend(self.per_pattern.iter().map(|r| cell(r.metrics.values()[i], r.flags[i])));
            row.push(cell(self.average.values()[i], self.average_flags[i]));
            out += &format!("| {} |\n", row.join(" | "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_csv, split, SplitSpec};
    use crate::fuzzify::{fit_specs, FuzzifyOptions};

    fn prov(k: usize) -> ReportProvenance {
        ReportProvenance {
            config_fingerprint: "cfg".into(),
            seed: 1,
            params: BoostParams::default(),
            k,
            cumulative: false,
        }
    }

    fn m(v: f64) -> Metrics {
        Metrics::from_values([v; 5])
    }

    #[test]
    fn identical_rows_average_to_baseline() {
        let base = Metrics { auc: 0.91, accuracy: 0.87, recall: 0.71, precision: 0.66, f1: 0.683 };
        let rows: Vec<(usize, Metrics)> = (1..=5).map(|i| (i, base)).collect();
        let r = build_report(base, &rows, prov(5)).unwrap();
        assert_eq!(r.average, base);
        assert!(r.per_pattern.iter().all(|row| row.flags == [Flag::Equal; 5]));
        assert_eq!(r.average_flags, [Flag::Equal; 5]);
    }

    #[test]
    fn average_and_flags() {
        let base = Metrics { recall: 0.75, ..m(0.5) };
        let rows = [(1, Metrics { recall: 0.70, ..m(0.5) }), (2, Metrics { recall: 0.80, ..m(0.5) })];
        let r = build_report(base, &rows, prov(2)).unwrap();
        assert!((r.average.recall - 0.75).abs() < 1e-12);
        assert_eq!(r.per_pattern[0].flags[2], Flag::Worse);
        assert_eq!(r.per_pattern[1].flags[2], Flag::Improved);
        assert!(matches!(build_report(base, &[], prov(0)), Err(AugmentError::EmptyReport)));
    }

    #[test]
    fn flag_rounding() {
        assert_eq!(flag(0.81234, 0.81231), Flag::Equal);
        assert_eq!(flag(0.8124, 0.8123), Flag::Improved);
    }

    #[test]
    fn markdown_layout() {
        let rows: Vec<(usize, Metrics)> = (1..=5).map(|i| (i, m(0.5 + i as f64 / 100.0))).collect();
        let md = build_report(m(0.52), &rows, prov(5)).unwrap().to_markdown();
        assert!(md.contains("| Metric | Baseline | Top-1 | Top-2 | Top-3 | Top-4 | Top-5 | AVG |"));
        assert!(md.contains("**0.5300**"));
        assert!(md.contains("cfg"));
    }

    const APPENDIX: &str = "ID,Shop Location,Age,Spending,Churn
A,N,25,5000,1
B,S,30,3000,0
C,N,28,4500,1
D,C,55,7000,0
E,N,60,1000,1
F,S,35,6500,0
G,N,40,5500,1
H,C,65,3500,0
I,S,23,4500,1
J,N,50,3000,1
";

    #[test]
    fn categorical_single_item_pattern() {
        let ds = parse_csv(APPENDIX.as_bytes(), "Churn", "1").unwrap();
        let ds = crate::dataset::drop_columns(&ds, &["ID".into()]).unwrap();
        let specs = fit_specs(&ds, &FuzzifyOptions::default()).unwrap();
        let p = Pattern { items: vec!["Shop Location=N".into()], utility: 0.0, support: 0 };
        let f = pattern_feature(&p, 1, &ds, &specs).unwrap();
        assert_eq!(f.values, vec![1, 0, 1, 0, 1, 0, 1, 0, 0, 1]);
        assert_eq!(f.column_name, "HAFCP_1");
        let none = Pattern { items: vec!["Shop Location=N".into(), "Shop Location=S".into()], utility: 0.0, support: 0 };
        assert!(pattern_feature(&none, 2, &ds, &specs).unwrap().values.iter().all(|&v| v == 0));
        let bad = Pattern { items: vec!["Region=X".into()], utility: 0.0, support: 0 };
        assert!(matches!(pattern_feature(&bad, 1, &ds, &specs), Err(AugmentError::UnresolvableItem(_))));
    }

    #[test]
    fn specs_from_another_split_are_rejected() {
        let ds = parse_csv(APPENDIX.as_bytes(), "Churn", "1").unwrap();
        let ds = crate::dataset::drop_columns(&ds, &["ID".into()]).unwrap();
        let (tr, te) = split(&ds, &SplitSpec::new(0.7, 3)).unwrap();
        let leaked = fit_specs(&ds, &FuzzifyOptions::default()).unwrap();
        let p = Pattern { items: vec!["Shop Location=N".into()], utility: 0.0, support: 0 };
        assert!(matches!(
            evaluate_with_pattern(&tr, &te, &leaked, &p, 1, &BoostParams::default()),
            Err(AugmentError::Leakage { .. })
        ));
    }
}
