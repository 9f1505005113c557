// Exact top-k search: depth-first over utility lists with a rising
// admission threshold and remaining-utility pruning.

use super::{
    make_pattern, resolve, slack, MinerError, MiningConfig, Pattern, ProfitTable, Result, TopK,
    TransactionDB,
};

/// Search rank of every item: ascending transaction-weighted utility, ties
/// by item index.
fn ranks(db: &TransactionDB, profits: &[f64]) -> Vec<usize> {
    let mut twu = vec![0.0; db.items.len()];
    for t in &db.transactions {
        let tu: f64 = t.iter().map(|&(i, q)| q * profits[i as usize]).sum();
        for &(i, _) in t {
            twu[i as usize] += tu;
        }
    }
    let mut order: Vec<usize> = (0..db.items.len()).collect();
    order.sort_by(|&a, &b| twu[a].total_cmp(&twu[b]).then(a.cmp(&b)));
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Item names in the order the search extends prefixes.
pub fn search_order(db: &TransactionDB, pt: &ProfitTable) -> Result<Vec<String>> {
    let profits = pt.aligned(db)?;
    let rank = ranks(db, &profits);
    let mut names: Vec<(usize, &String)> = rank.iter().copied().zip(&db.items).collect();
    names.sort();
    Ok(names.into_iter().map(|(_, n)| n.clone()).collect())
}

/// Upper bound used to prune the extensions of `items`: over every
/// transaction containing the itemset, its own utility plus the utility of
/// all items ranked after its last item in [`search_order`].
pub fn remaining_utility_bound(db: &TransactionDB, pt: &ProfitTable, items: &[impl AsRef<str>]) -> Result<f64> {
    let profits = pt.aligned(db)?;
    let rank = ranks(db, &profits);
    let (_, idx) = resolve(db, items)?;
    let last = idx.iter().map(|&i| rank[i]).max().expect("nonempty");
    let mut bound = 0.0;
    for t in db.tids_of(&idx) {
        for &(i, q) in &db.transactions[t] {
            if idx.contains(&(i as usize)) || rank[i as usize] > last {
                bound += q * profits[i as usize];
            }
        }
    }
    Ok(bound)
}

struct UtilityList {
    item: usize,
    /// (tid, utility of the itemset in tid, remaining utility in tid)
    entries: Vec<(u32, f64, f64)>,
    sum_iu: f64,
    sum_ru: f64,
}

impl UtilityList {
    fn from_entries(item: usize, entries: Vec<(u32, f64, f64)>) -> Self {
        let sum_iu = entries.iter().map(|e| e.1).sum();
        let sum_ru = entries.iter().map(|e| e.2).sum();
        Self { item, entries, sum_iu, sum_ru }
    }

    fn tids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0 as usize).collect()
    }
}

/// Utility list of `prefix ∪ {x, y}` from those of `prefix ∪ {x}` and
/// `prefix ∪ {y}`.
fn join(prefix: Option<&UtilityList>, x: &UtilityList, y: &UtilityList) -> UtilityList {
    let mut out = Vec::with_capacity(x.entries.len().min(y.entries.len()));
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < x.entries.len() && j < y.entries.len() {
        let (tx, ty) = (x.entries[i].0, y.entries[j].0);
        if tx < ty {
            i += 1;
        } else if ty < tx {
            j += 1;
        } else {
            let shared = match prefix {
                Some(p) => {
                    while p.entries[k].0 < tx {
                        k += 1;
                    }
                    p.entries[k].1
                }
                None => 0.0,
            };
            out.push((tx, x.entries[i].1 + y.entries[j].1 - shared, y.entries[j].2));
            i += 1;
            j += 1;
        }
    }
    UtilityList::from_entries(y.item, out)
}

struct Search<'a> {
    db: &'a TransactionDB,
    profits: &'a [f64],
    min_len: usize,
    max_len: usize,
    top: TopK,
}

impl Search<'_> {
    fn threshold(&self) -> f64 {
        let t = self.top.threshold();
        t - slack(t)
    }

    fn explore(&mut self, prefix: &mut Vec<usize>, prefix_ul: Option<&UtilityList>, exts: &[UtilityList]) {
        for (n, x) in exts.iter().enumerate() {
            prefix.push(x.item);
            if prefix.len() >= self.min_len && x.sum_iu >= self.threshold() {
                let p = make_pattern(self.db, self.profits, prefix, &x.tids());
                self.top.offer(p);
            }
            if prefix.len() < self.max_len && x.sum_iu + x.sum_ru >= self.threshold() {
                let next: Vec<UtilityList> = exts[n + 1..]
                    .iter()
                    .map(|y| join(prefix_ul, x, y))
                    .filter(|ul| !ul.entries.is_empty())
                    .collect();
                if !next.is_empty() {
                    self.explore(prefix, Some(x), &next);
                }
            }
            prefix.pop();
        }
    }
}

/// Exact top-k high-utility itemsets with `min_length <= |P| <= max_length`
/// and support of at least one transaction.
pub fn mine_topk(db: &TransactionDB, pt: &ProfitTable, cfg: &MiningConfig) -> Result<Vec<Pattern>> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(MinerError::EmptyDatabase);
    }
    let profits = pt.aligned(db)?;
    let rank = ranks(db, &profits);
    let n_items = db.items.len();
    let mut by_rank = vec![0; n_items];
    for (i, &r) in rank.iter().enumerate() {
        by_rank[r] = i;
    }

    let mut lists: Vec<Vec<(u32, f64, f64)>> = vec![Vec::new(); n_items];
    for (tid, t) in db.transactions.iter().enumerate() {
        let mut cells: Vec<(usize, f64)> =
            t.iter().map(|&(i, q)| (rank[i as usize], q * profits[i as usize])).collect();
        cells.sort_by_key(|c| c.0);
        let mut remaining: f64 = cells.iter().map(|c| c.1).sum();
        for (r, u) in cells {
            remaining -= u;
            lists[r].push((tid as u32, u, remaining.max(0.0)));
        }
    }
    let singles: Vec<UtilityList> = lists
        .into_iter()
        .enumerate()
        .map(|(r, e)| UtilityList::from_entries(by_rank[r], e))
        .filter(|ul| !ul.entries.is_empty())
        .collect();

    let mut search = Search {
        db,
        profits: &profits,
        min_len: cfg.min_length,
        max_len: cfg.max_len(n_items),
        top: TopK::new(cfg.k),
    };
    search.explore(&mut Vec::new(), None, &singles);
    Ok(search.top.patterns)
}

#[cfg(test)]
mod tests {
    use super::super::tests::appendix_db;
    use super::super::{brute_force_topk, UtilityMode};
    use super::*;

    #[test]
    fn appendix_top5() {
        let (db, pt) = appendix_db(UtilityMode::Binary);
        let got = mine_topk(&db, &pt, &MiningConfig::new(5)).unwrap();
        let names: Vec<Vec<&str>> =
            got.iter().map(|p| p.items.iter().map(String::as_str).collect()).collect();
        assert_eq!(
            names,
            vec![
                vec!["Age_L", "Spend_M"],
                vec!["Age_H", "SL_N", "Spend_L"],
                vec!["Age_L", "SL_N", "Spend_M"],
                vec!["Age_H", "Spend_L"],
                vec!["SL_N", "Spend_M"],
            ]
        );
        assert_eq!(got[0].utility, 3.0 * (0.5 + 0.3));
        assert_eq!(got, brute_force_topk(&db, &pt, &MiningConfig::new(5)).unwrap());
    }

    #[test]
    fn single_transaction() {
        let db = TransactionDB::new(
            vec!["a".into(), "b".into()],
            vec![vec![(0, 1.0), (1, 1.0)]],
            UtilityMode::Binary,
            "t",
        );
        let pt = ProfitTable::new(vec![("a".into(), 1.0), ("b".into(), 2.0)]);
        let got = mine_topk(&db, &pt, &MiningConfig::new(1)).unwrap();
        assert_eq!(got, vec![Pattern { items: vec!["a".into(), "b".into()], utility: 3.0, support: 1 }]);
    }

    #[test]
    fn k_larger_than_candidates() {
        let (db, pt) = appendix_db(UtilityMode::Binary);
        let all = mine_topk(&db, &pt, &MiningConfig::new(10_000)).unwrap();
        let oracle = brute_force_topk(&db, &pt, &MiningConfig::new(10_000)).unwrap();
        assert_eq!(all, oracle);
        assert!(all.len() < 10_000);
        assert!(all.iter().all(|p| p.support >= 1));
    }

    #[test]
    fn empty_database() {
        let db = TransactionDB::new(vec!["a".into()], vec![], UtilityMode::Binary, "t");
        let pt = ProfitTable::new(vec![]);
        assert!(matches!(mine_topk(&db, &pt, &MiningConfig::new(1)), Err(MinerError::EmptyDatabase)));
    }
}
