//! Runs the library pipeline on a synthetic dataset with one planted rule.

use hafcp::augment::{baseline_metrics, evaluate_with_pattern};
use hafcp::dataset::{parse_csv, split, SplitSpec};
use hafcp::fuzzify::{fit_specs, to_binary_frame, FuzzifyOptions};
use hafcp::gbdt::{importance, train, BoostParams, ImportanceMethod};
use hafcp::miner::{build_transactions, mine_topk, MiningConfig, UtilityMode};
use hafcp::synth::{planted_rule_csv, PlantedRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = parse_csv(planted_rule_csv(&PlantedRule::default()).as_bytes(), "Churn", "yes")?;
    let (tr, te) = split(&ds, &SplitSpec::new(0.8, 7))?;
    let params = BoostParams::default();
    let model = train(&tr, &params)?;
    let imp = importance(&model, &tr, ImportanceMethod::Gain)?;
    let specs = fit_specs(&tr, &FuzzifyOptions::default())?;
    let frame = to_binary_frame(&tr, &specs)?;
    let (db, pt) = build_transactions(&frame, tr.label(), &imp, UtilityMode::Binary)?;
    let patterns = mine_topk(&db, &pt, &MiningConfig::new(3))?;
    let base = baseline_metrics(&tr, &te, &params)?;
    println!("baseline recall {:.4}", base.recall);
    for (i, p) in patterns.iter().enumerate() {
        let m = evaluate_with_pattern(&tr, &te, &specs, p, i + 1, &params)?;
        println!("top-{} {:?} utility {:.4} recall {:.4}", i + 1, p.items, p.utility, m.recall);
    }
    Ok(())
}
