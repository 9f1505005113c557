// Level-wise beam search: only the k best itemsets of each level are
// extended. Approximate; kept for comparison with the exact miner.

use std::collections::BTreeSet;

use super::{make_pattern, rank_cmp, MinerError, MiningConfig, Pattern, ProfitTable, Result, TransactionDB};

pub fn mine_beam(db: &TransactionDB, pt: &ProfitTable, cfg: &MiningConfig) -> Result<Vec<Pattern>> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(MinerError::EmptyDatabase);
    }
    let profits = pt.aligned(db)?;
    let n = db.items.len();
    let max_len = cfg.max_len(n);

    let evaluate = |set: &[usize]| -> Option<Pattern> {
        let tids = db.tids_of(set);
        (!tids.is_empty()).then(|| make_pattern(db, &profits, set, &tids))
    };

    let mut level: Vec<(Vec<usize>, Pattern)> =
        (0..n).filter_map(|i| evaluate(&[i]).map(|p| (vec![i], p))).collect();
    let mut results: Vec<Pattern> = Vec::new();
    let mut len = 1;
    while !level.is_empty() {
        if len >= cfg.min_length {
            results.extend(level.iter().map(|(_, p)| p.clone()));
        }
        if len >= max_len {
            break;
        }
        level.sort_by(|a, b| rank_cmp(&a.1, &b.1));
        level.truncate(cfg.k);
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (set, _) in &level {
            for i in 0..n {
                if set.contains(&i) {
                    continue;
                }
                let mut s = set.clone();
                s.push(i);
                s.sort_unstable();
                if seen.insert(s.clone()) {
                    if let Some(p) = evaluate(&s) {
                        next.push((s, p));
                    }
                }
            }
        }
        level = next;
        len += 1;
    }
    results.sort_by(rank_cmp);
    results.truncate(cfg.k);
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::super::tests::appendix_db;
    use super::super::{mine_topk, UtilityMode};
    use super::*;

    #[test]
    fn beam_never_beats_exact() {
        let (db, pt) = appendix_db(UtilityMode::Binary);
        let cfg = MiningConfig::new(5);
        let exact = mine_topk(&db, &pt, &cfg).unwrap();
        let beam = mine_beam(&db, &pt, &cfg).unwrap();
        assert!(beam.len() <= exact.len());
        for (b, e) in beam.iter().zip(&exact) {
            assert!(b.utility <= e.utility + 1e-12);
        }
    }

    #[test]
    fn narrow_beam_can_miss_the_optimum() {
        // Singles: a = 5, b = 4, c = 6, so a k = 1 beam keeps only {c} and
        // finds {a, c} = 7, missing {a, b} = 8.
        let items = vec!["a".to_string(), "b".into(), "c".into()];
        let mut t = vec![vec![(0, 1.0), (1, 1.0)]; 4];
        t.push(vec![(0, 1.0), (2, 1.0)]);
        let db = TransactionDB::new(items, t, UtilityMode::Binary, "t");
        let pt = ProfitTable::new(vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 6.0)]);
        let cfg = MiningConfig::new(1);
        let exact = mine_topk(&db, &pt, &cfg).unwrap();
        let beam = mine_beam(&db, &pt, &cfg).unwrap();
        assert_eq!(exact[0].items, ["a", "b"]);
        assert_eq!(beam[0].items, ["a", "c"]);
        assert!(beam[0].utility < exact[0].utility);
    }
}
