//! Seeded synthetic data: a churn table with a planted rule, and random
//! transaction databases for property checks.

use crate::miner::{ProfitTable, TransactionDB, UtilityMode};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedRule {
    pub n_rows: usize,
    /// Probability of flipping each label after the rule is applied.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PlantedRule {
    fn default() -> Self {
        Self { n_rows: 2000, noise: 0.05, seed: 2024 }
    }
}

/// CSV with numeric columns `A`, `B`, `C` drawn uniformly from `[0, 100)`,
/// a categorical `Region` and a `Churn` label (`yes`/`no`).
///
/// Churn holds exactly when `A < 25` and `25 <= B < 75` before noise. On
/// uniform data those bands are what the triangular min/median/max
/// memberships call `A_L` and `B_M`.
pub fn planted_rule_csv(cfg: &PlantedRule) -> String {
    const REGIONS: [&str; 4] = ["north", "south", "east", "west"];
    let mut rng = SplitMix64::new(cfg.seed);
    let mut out = String::from("A,B,C,Region,Churn\n");
    for _ in 0..cfg.n_rows {
        let a = (rng.next_f64() * 100.0 * 100.0).round() / 100.0;
        let b = (rng.next_f64() * 100.0 * 100.0).round() / 100.0;
        let c = (rng.next_f64() * 100.0 * 100.0).round() / 100.0;
        let region = REGIONS[rng.next_below(4) as usize];
        let mut churn = a < 25.0 && (25.0..75.0).contains(&b);
        if rng.next_f64() < cfg.noise {
            churn = !churn;
        }
        out += &format!("{a},{b},{c},{region},{}\n", if churn { "yes" } else { "no" });
    }
    out
}

/// Random database with `n_items` items and `n_transactions` transactions.
/// Each item appears in a transaction with probability `density`; profits
/// are uniform in `[0, 1)`; membership-mode quantities are uniform in
/// `(0, 1]`.
pub fn random_instance(
    seed: u64,
    n_items: usize,
    n_transactions: usize,
    density: f64,
    mode: UtilityMode,
) -> (TransactionDB, ProfitTable) {
    let mut rng = SplitMix64::new(seed);
    let items: Vec<String> = (0..n_items).map(|i| format!("i{i:02}")).collect();
    let transactions = (0..n_transactions)
        .map(|_| {
            (0..n_items as u32)
                .filter_map(|i| {
                    let present = rng.next_f64() < density;
                    let q = 1.0 - rng.next_f64();
                    present.then_some((i, q))
                })
                .collect()
        })
        .collect();
    let profits: Vec<(String, f64)> = items.iter().map(|n| (n.clone(), rng.next_f64())).collect();
    (TransactionDB::new(items, transactions, mode, "random"), ProfitTable::new(profits))
}
