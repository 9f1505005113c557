//! The appendix example: ten customers with their printed fuzzy labels and
//! membership degrees, and the profit table derived from importance.

#![allow(dead_code)]

use hafcp::fuzzify::{BinaryFrame, Item, ItemSource, Term};
use hafcp::gbdt::{ImportanceMethod, ImportanceTable};
use hafcp::miner::{build_transactions, ProfitTable, TransactionDB, UtilityMode};

pub const CSV: &str = "ID,Shop Location,Age,Spending,Churn
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

pub const CUSTOMERS: [&str; 10] = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J"];

/// Shop-location items are named `SL_<value>` as in the appendix.
fn shop(value: &str) -> Item {
    Item {
        name: format!("SL_{value}"),
        column: "SL".into(),
        source: ItemSource::Categorical { value: value.into() },
    }
}

pub fn frame() -> BinaryFrame {
    let items = vec![
        shop("C"),
        shop("N"),
        shop("S"),
        Item::fuzzy("Age", Term::L),
        Item::fuzzy("Age", Term::M),
        Item::fuzzy("Age", Term::H),
        Item::fuzzy("Spend", Term::L),
        Item::fuzzy("Spend", Term::M),
        Item::fuzzy("Spend", Term::H),
    ];
    // (shop item, age item, age mu, spending item, spending mu, churn)
    let raw = [
        (1, 3, 0.97, 7, 0.97, 1),
        (2, 3, 0.99, 6, 0.99, 0),
        (1, 3, 0.99, 7, 1.0, 1),
        (0, 4, 0.99, 8, 0.66, 0),
        (1, 5, 0.92, 6, 0.49, 1),
        (2, 4, 0.98, 8, 0.82, 0),
        (1, 4, 0.98, 7, 0.99, 1),
        (0, 5, 0.76, 6, 0.97, 0),
        (2, 3, 0.93, 7, 1.0, 1),
        (1, 5, 0.97, 6, 0.99, 1),
    ];
    let rows = raw.iter().map(|&(s, a, am, p, pm, _)| vec![(s, 1.0), (a, am), (p, pm)]).collect();
    let labels = raw.iter().map(|r| r.5).collect();
    BinaryFrame::new(items, rows, labels, "appendix").unwrap()
}

pub fn importance() -> ImportanceTable {
    ImportanceTable::new(
        ImportanceMethod::External,
        vec![("SL".into(), 0.2), ("Age".into(), 0.5), ("Spend".into(), 0.3)],
    )
    .unwrap()
}

pub fn db(mode: UtilityMode) -> (TransactionDB, ProfitTable) {
    let f = frame();
    build_transactions(&f, &f.labels, &importance(), mode).unwrap()
}
