//! Seeded noisy classification tables for model-level properties.

#![allow(dead_code)]

use hafcp::dataset::{parse_csv, ColumnarDataset};
use hafcp::rng::SplitMix64;

/// `n` rows, `p` numeric features plus a 3-level categorical `g`; the label
/// follows a logistic model of two of the features and the category.
pub fn classification_csv(seed: u64, n: usize, p: usize) -> String {
    let mut rng = SplitMix64::new(seed);
    let mut out: String = (0..p).map(|j| format!("x{j},")).collect();
    out += "g,y\n";
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| (rng.next_gaussian() * 1000.0).round() / 1000.0).collect();
        let g = rng.next_below(3);
        let z = 1.5 * x[0] - x[p.min(2) - 1] + 0.7 * g as f64 - 0.5;
        let y = u8::from(rng.next_f64() < 1.0 / (1.0 + (-z).exp()));
        for v in &x {
            out += &format!("{v},");
        }
        out += &format!("g{g},{y}\n");
    }
    out
}

pub fn classification(seed: u64, n: usize, p: usize) -> ColumnarDataset {
    parse_csv(classification_csv(seed, n, p).as_bytes(), "y", "1").unwrap()
}
