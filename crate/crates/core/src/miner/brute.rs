// Exhaustive enumeration; the reference the exact search is checked against.

use super::{make_pattern, rank_cmp, MinerError, MiningConfig, Pattern, ProfitTable, Result, TransactionDB};

pub const ORACLE_MAX_ITEMS: usize = 20;

/// Enumerates every itemset in the configured length range, keeps those
/// with nonzero support, and returns the best `k` in result order.
pub fn brute_force_topk(db: &TransactionDB, pt: &ProfitTable, cfg: &MiningConfig) -> Result<Vec<Pattern>> {
    cfg.validate()?;
    let n = db.items.len();
    if n > ORACLE_MAX_ITEMS {
        return Err(MinerError::TooManyItemsForOracle(n));
    }
    if db.is_empty() {
        return Err(MinerError::EmptyDatabase);
    }
    let profits = pt.aligned(db)?;
    let max_len = cfg.max_len(n);

    // Each transaction as a bitmask of its items.
    let masks: Vec<u32> = db
        .transactions
        .iter()
        .map(|t| t.iter().fold(0u32, |m, &(i, _)| m | (1 << i)))
        .collect();

    let mut all = Vec::new();
    for set in 1u32..(1u32 << n) {
        let len = set.count_ones() as usize;
        if len < cfg.min_length || len > max_len {
            continue;
        }
        let tids: Vec<usize> = (0..masks.len()).filter(|&t| masks[t] & set == set).collect();
        if tids.is_empty() {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| set & (1 << i) != 0).collect();
        all.push(make_pattern(db, &profits, &idx, &tids));
    }
    all.sort_by(rank_cmp);
    all.truncate(cfg.k);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::super::UtilityMode;
    use super::*;

    #[test]
    fn single_item_has_no_pairs() {
        let db = TransactionDB::new(vec!["a".into()], vec![vec![(0, 1.0)]], UtilityMode::Binary, "t");
        let pt = ProfitTable::new(vec![("a".into(), 1.0)]);
        assert!(brute_force_topk(&db, &pt, &MiningConfig::new(3)).unwrap().is_empty());
    }

    #[test]
    fn oracle_guard() {
        let items: Vec<String> = (0..21).map(|i| format!("i{i}")).collect();
        let t = (0..21).map(|i| (i as u32, 1.0)).collect();
        let db = TransactionDB::new(items, vec![t], UtilityMode::Binary, "t");
        let pt = ProfitTable::new(db.items.iter().map(|n| (n.clone(), 1.0)).collect());
        assert!(matches!(
            brute_force_topk(&db, &pt, &MiningConfig::new(1)),
            Err(MinerError::TooManyItemsForOracle(21))
        ));
    }
}
