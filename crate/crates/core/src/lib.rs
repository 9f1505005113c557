//! Mining highly associated fuzzy churn patterns.
//!
//! The pipeline trains a gradient-boosted tree classifier on a labeled churn
//! table, turns its per-feature importance into a profit table, discretizes
//! numeric columns into Low/Medium/High fuzzy items, mines the top-k
//! high-utility itemsets among churned rows and finally feeds each pattern
//! back into the model as a binary feature.
//!
//! ```no_run
//! use hafcp::dataset::{load_csv, split, SplitSpec};
//! use hafcp::gbdt::{importance, train, BoostParams, ImportanceMethod};
//!
//! let ds = load_csv("churn.csv", "Churn", "1").unwrap();
//! let (tr, _te) = split(&ds, &SplitSpec::new(0.8, 7)).unwrap();
//! let model = train(&tr, &BoostParams::default()).unwrap();
//! let table = importance(&model, &tr, ImportanceMethod::Gain).unwrap();
//! println!("{:?}", table.scores);
//! ```

pub mod augment;
pub mod dataset;
pub mod fingerprint;
pub mod fuzzify;
pub mod gbdt;
pub mod miner;
pub mod rng;
pub mod synth;
