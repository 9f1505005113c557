//! Typed columnar churn tables: CSV ingestion, categorical encoding and a
//! seeded, reproducible train/test split.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint;
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("unparseable cell at row {0}, column `{1}`")]
    UnparseableCell(usize, String),
    #[error("dataset has no data rows")]
    EmptyDataset,
    #[error("dataset too small to split into two non-empty sides ({0} rows)")]
    DatasetTooSmall(usize),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("cannot drop label column `{0}`")]
    CannotDropLabel(String),
    #[error("invalid train fraction {0}; must lie in (0, 1)")]
    InvalidFraction(f64),
    #[error("column `{0}` already exists")]
    DuplicateColumn(String),
    #[error("column length {got} does not match row count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Category strings indexed by code; codes are assigned in order of first
    /// appearance. Present for categorical and label columns only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_map: Option<Vec<String>>,
}

impl ColumnSchema {
    pub fn code_of(&self, value: &str) -> Option<u32> {
        self.category_map
            .as_ref()?
            .iter()
            .position(|v| v == value)
            .map(|p| p as u32)
    }

    pub fn value_of(&self, code: u32) -> Option<&str> {
        self.category_map.as_ref()?.get(code as usize).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell as a real; categorical codes are cast (ordinal encoding).
    pub fn value(&self, row: usize) -> f64 {
        match self {
            ColumnData::Numeric(v) => v[row],
            ColumnData::Categorical(v) => v[row] as f64,
        }
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r]).collect())
            }
        }
    }
}

/// An immutable, typed table with exactly one binary label column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnarDataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
    label: Vec<u8>,
    /// Row positions in the originally loaded file.
    row_ids: Vec<usize>,
    fingerprint: String,
}

impl ColumnarDataset {
    /// Assembles a dataset from parts. `label_column` must name a column of
    /// kind [`ColumnKind::Label`].
    pub fn from_parts(
        schema: Vec<ColumnSchema>,
        columns: Vec<ColumnData>,
        label: Vec<u8>,
        fingerprint: impl Into<String>,
    ) -> Result<Self> {
        let n = label.len();
        if n == 0 {
            return Err(DatasetError::EmptyDataset);
        }
        for c in &columns {
            if c.len() != n {
                return Err(DatasetError::LengthMismatch { expected: n, got: c.len() });
            }
        }
        let labels = schema.iter().filter(|s| s.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(DatasetError::MissingLabelColumn(format!("{labels} label columns")));
        }
        debug_assert!(label.iter().all(|&y| y <= 1));
        Ok(Self {
            schema,
            columns,
            label,
            row_ids: (0..n).collect(),
            fingerprint: fingerprint.into(),
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.label.len()
    }

    pub fn label(&self) -> &[u8] {
        &self.label
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Lineage fingerprint: changes whenever the source bytes, split or
    /// column selection change.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s.name == name)
    }

    pub fn column(&self, name: &str) -> Option<(&ColumnSchema, &ColumnData)> {
        let i = self.column_index(name)?;
        Some((&self.schema[i], &self.columns[i]))
    }

    pub fn column_at(&self, i: usize) -> (&ColumnSchema, &ColumnData) {
        (&self.schema[i], &self.columns[i])
    }

    pub fn label_name(&self) -> &str {
        &self
            .schema
            .iter()
            .find(|s| s.kind == ColumnKind::Label)
            .expect("exactly one label column")
            .name
    }

    /// Indices of the non-label columns, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        self.schema
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind != ColumnKind::Label)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices().into_iter().map(|i| self.schema[i].name.clone()).collect()
    }

    /// Feature columns as reals (column-major), in schema order.
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.feature_indices()
            .into_iter()
            .map(|i| (0..self.n_rows()).map(|r| self.columns[i].value(r)).collect())
            .collect()
    }

    /// Decodes a categorical or label cell back to its original string.
    pub fn decode(&self, column: usize, row: usize) -> Option<&str> {
        match &self.columns[column] {
            ColumnData::Categorical(codes) => self.schema[column].value_of(codes[row]),
            ColumnData::Numeric(_) => None,
        }
    }

    /// Subset of rows in the given order.
    pub fn take_rows(&self, rows: &[usize], fingerprint: String) -> Self {
        Self {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            label: rows.iter().map(|&r| self.label[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            fingerprint,
        }
    }

    /// Returns a copy with a numeric column appended after all existing
    /// columns. The fingerprint is kept: engineered columns are derived data.
    pub fn with_numeric_column(&self, name: &str, values: Vec<f64>) -> Result<Self> {
        if self.column_index(name).is_some() {
            return Err(DatasetError::DuplicateColumn(name.to_string()));
        }
        if values.len() != self.n_rows() {
            return Err(DatasetError::LengthMismatch { expected: self.n_rows(), got: values.len() });
        }
        let mut out = self.clone();
        out.schema.push(ColumnSchema {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
            category_map: None,
        });
        out.columns.push(ColumnData::Numeric(values));
        Ok(out)
    }
}

/// Reads a CSV file. A column is numeric when its first data cell parses as
/// a finite real; every later cell of a numeric column must parse too.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: &str,
) -> Result<ColumnarDataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&bytes, label_column, positive_label)
}

/// Parses CSV bytes; see [`load_csv`].
pub fn parse_csv(bytes: &[u8], label_column: &str, positive_label: &str) -> Result<ColumnarDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(label_column.to_string()))?;

    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }

    let mut schema = Vec::with_capacity(header.len());
    let mut columns = Vec::with_capacity(header.len());
    let mut label = Vec::with_capacity(records.len());

    for (c, name) in header.iter().enumerate() {
        let cell = |r: usize| records[r].get(c).unwrap_or("").trim();
        if c == label_idx {
            let mut map: Vec<String> = Vec::new();
            let mut codes = Vec::with_capacity(records.len());
            for r in 0..records.len() {
                let v = cell(r);
                if v.is_empty() {
                    return Err(DatasetError::UnparseableCell(r + 1, name.clone()));
                }
                codes.push(intern(&mut map, v));
                label.push(u8::from(v == positive_label));
            }
            schema.push(ColumnSchema {
                name: name.clone(),
                kind: ColumnKind::Label,
                category_map: Some(map),
            });
            columns.push(ColumnData::Categorical(codes));
            continue;
        }

        if parse_real(cell(0)).is_some() {
            let mut values = Vec::with_capacity(records.len());
            for r in 0..records.len() {
                let v = parse_real(cell(r))
                    .ok_or_else(|| DatasetError::UnparseableCell(r + 1, name.clone()))?;
                values.push(v);
            }
            schema.push(ColumnSchema { name: name.clone(), kind: ColumnKind::Numeric, category_map: None });
            columns.push(ColumnData::Numeric(values));
        } else {
            let mut map: Vec<String> = Vec::new();
            let mut codes = Vec::with_capacity(records.len());
            for r in 0..records.len() {
                let v = cell(r);
                if v.is_empty() {
                    return Err(DatasetError::UnparseableCell(r + 1, name.clone()));
                }
                codes.push(intern(&mut map, v));
            }
            schema.push(ColumnSchema {
                name: name.clone(),
                kind: ColumnKind::Categorical,
                category_map: Some(map),
            });
            columns.push(ColumnData::Categorical(codes));
        }
    }

    let fp = fingerprint::derive(
        &fingerprint::sha256_hex(bytes),
        &["load", label_column, positive_label],
    );
    ColumnarDataset::from_parts(schema, columns, label, fp)
}

fn intern(map: &mut Vec<String>, v: &str) -> u32 {
    match map.iter().position(|m| m == v) {
        Some(p) => p as u32,
        None => {
            map.push(v.to_string());
            (map.len() - 1) as u32
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        Self { train_fraction, seed }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 0 }
    }
}

/// Shuffled row indices for both sides of the split.
pub fn split_indices(n_rows: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(spec.train_fraction));
    }
    if n_rows < 2 {
        return Err(DatasetError::DatasetTooSmall(n_rows));
    }
    let n_train = (spec.train_fraction * n_rows as f64).floor() as usize;
    if n_train == 0 || n_train == n_rows {
        return Err(DatasetError::DatasetTooSmall(n_rows));
    }
    let mut idx: Vec<usize> = (0..n_rows).collect();
    SplitMix64::new(spec.seed).shuffle(&mut idx);
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn split(ds: &ColumnarDataset, spec: &SplitSpec) -> Result<(ColumnarDataset, ColumnarDataset)> {
    let (tr, te) = split_indices(ds.n_rows(), spec)?;
    let frac = spec.train_fraction.to_string();
    let seed = spec.seed.to_string();
    let fp_tr = fingerprint::derive(ds.fingerprint(), &["split", &frac, &seed, "train"]);
    let fp_te = fingerprint::derive(ds.fingerprint(), &["split", &frac, &seed, "test"]);
    Ok((ds.take_rows(&tr, fp_tr), ds.take_rows(&te, fp_te)))
}

pub fn drop_columns(ds: &ColumnarDataset, names: &[String]) -> Result<ColumnarDataset> {
    let mut drop = Vec::with_capacity(names.len());
    for n in names {
        let i = ds.column_index(n).ok_or_else(|| DatasetError::UnknownColumn(n.clone()))?;
        if ds.schema[i].kind == ColumnKind::Label {
            return Err(DatasetError::CannotDropLabel(n.clone()));
        }
        drop.push(i);
    }
    if drop.is_empty() {
        return Ok(ds.clone());
    }
    let keep: Vec<usize> = (0..ds.schema.len()).filter(|i| !drop.contains(i)).collect();
    let mut parts = vec!["drop"];
    parts.extend(names.iter().map(String::as_str));
    Ok(ColumnarDataset {
        schema: keep.iter().map(|&i| ds.schema[i].clone()).collect(),
        columns: keep.iter().map(|&i| ds.columns[i].clone()).collect(),
        label: ds.label.clone(),
        row_ids: ds.row_ids.clone(),
        fingerprint: fingerprint::derive(ds.fingerprint(), &parts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn appendix() -> ColumnarDataset {
        parse_csv(APPENDIX.as_bytes(), "Churn", "1").unwrap()
    }

    #[test]
    fn appendix_schema() {
        let ds = appendix();
        assert_eq!(ds.n_rows(), 10);
        let (sl, _) = ds.column("Shop Location").unwrap();
        assert_eq!(sl.kind, ColumnKind::Categorical);
        assert_eq!(sl.category_map.as_deref().unwrap(), ["N", "S", "C"]);
        assert_eq!(ds.column("Age").unwrap().0.kind, ColumnKind::Numeric);
        assert_eq!(ds.column("Spending").unwrap().0.kind, ColumnKind::Numeric);
        assert_eq!(ds.label(), &[1, 0, 1, 0, 1, 0, 1, 0, 1, 1]);
        assert_eq!(ds.label_name(), "Churn");
    }

    #[test]
    fn single_row_true_label() {
        let ds = parse_csv(b"x,y\n1.5,True\n", "y", "True").unwrap();
        assert_eq!(ds.label(), &[1]);
    }

    #[test]
    fn label_match_is_case_sensitive() {
        let ds = parse_csv(b"x,y\n1,true\n2,True\n", "y", "True").unwrap();
        assert_eq!(ds.label(), &[0, 1]);
    }

    #[test]
    fn unparseable_numeric_cell() {
        let csv = APPENDIX.replace("C,N,28,", "C,N,abc,");
        let err = parse_csv(csv.as_bytes(), "Churn", "1").unwrap_err();
        assert!(matches!(err, DatasetError::UnparseableCell(3, ref c) if c == "Age"), "{err}");
    }

    #[test]
    fn missing_numeric_cell_rejected() {
        let err = parse_csv(b"x,y\n1,1\n,0\n", "y", "1").unwrap_err();
        assert!(matches!(err, DatasetError::UnparseableCell(2, _)));
    }

    #[test]
    fn missing_label_and_empty() {
        assert!(matches!(
            parse_csv(APPENDIX.as_bytes(), "Label", "1"),
            Err(DatasetError::MissingLabelColumn(_))
        ));
        assert!(matches!(parse_csv(b"x,y\n", "y", "1"), Err(DatasetError::EmptyDataset)));
    }

    #[test]
    fn quoted_fields() {
        let ds = parse_csv(b"name,v,y\n\"a,b\",1,1\nc,2,0\n", "y", "1").unwrap();
        assert_eq!(ds.decode(0, 0), Some("a,b"));
    }

    #[test]
    fn categorical_round_trip() {
        let ds = appendix();
        let raw: Vec<&str> = APPENDIX.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        let c = ds.column_index("Shop Location").unwrap();
        for (r, v) in raw.iter().enumerate() {
            assert_eq!(ds.decode(c, r), Some(*v));
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = appendix();
        let spec = SplitSpec::new(0.8, 11);
        let (tr, te) = split(&ds, &spec).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (8, 2));
        let (tr2, te2) = split(&ds, &spec).unwrap();
        assert_eq!(tr.row_ids(), tr2.row_ids());
        assert_eq!(te.row_ids(), te2.row_ids());
        assert_eq!(tr.schema(), ds.schema());
        assert_ne!(tr.fingerprint(), te.fingerprint());
    }

    #[test]
    fn split_partition_5000() {
        let (tr, te) = split_indices(5000, &SplitSpec::new(0.8, 99)).unwrap();
        assert_eq!((tr.len(), te.len()), (4000, 1000));
        let mut seen = vec![false; 5000];
        for &i in tr.iter().chain(te.iter()) {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn split_too_small() {
        let ds = parse_csv(b"x,y\n1,1\n", "y", "1").unwrap();
        assert!(matches!(split(&ds, &SplitSpec::default()), Err(DatasetError::DatasetTooSmall(1))));
    }

    #[test]
    fn drop_columns_contract() {
        let ds = appendix();
        let out = drop_columns(&ds, &["ID".into(), "Age".into()]).unwrap();
        assert_eq!(out.schema().len(), 3);
        assert_eq!(out.n_rows(), 10);
        assert!(out.column("Age").is_none());
        assert_eq!(drop_columns(&ds, &[]).unwrap(), ds);
        assert!(matches!(
            drop_columns(&ds, &["Churn".into()]),
            Err(DatasetError::CannotDropLabel(_))
        ));
        assert!(matches!(
            drop_columns(&ds, &["Nope".into()]),
            Err(DatasetError::UnknownColumn(_))
        ));
    }

    #[test]
    fn drop_two_of_twenty() {
        let mut header: Vec<String> = (0..18).map(|i| format!("f{i}")).collect();
        header.extend(["STATE".into(), "AREA".into(), "Churn".into()]);
        let mut csv = header.join(",") + "\n";
        for r in 0..4 {
            let mut row: Vec<String> = (0..18).map(|i| (i * r).to_string()).collect();
            row.extend(["KS".into(), "415".into(), (r % 2).to_string()]);
            csv += &(row.join(",") + "\n");
        }
        let ds = parse_csv(csv.as_bytes(), "Churn", "1").unwrap();
        assert_eq!(ds.feature_names().len(), 20);
        let out = drop_columns(&ds, &["STATE".into(), "AREA".into()]).unwrap();
        assert_eq!(out.feature_names().len(), 18);
    }
}
