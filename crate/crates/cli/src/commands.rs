//! The four pipeline steps. Each reads its inputs from the output
//! directory, checks their lineage and writes its own artifacts plus a
//! manifest.

use hafcp::augment::{build_report, evaluate_with_pattern, evaluate_with_patterns, ReportProvenance};
use hafcp::dataset::{drop_columns, parse_csv, split, ColumnarDataset, DatasetError};
use hafcp::fuzzify::{fit_specs, to_binary_frame, BinaryFrame, FuzzifyOptions, MembershipSpec};
use hafcp::gbdt::{
    self, evaluate, importance, parse_importance, predict_proba, ImportanceMethod, ImportanceTable, Metrics,
};
use hafcp::miner::{self, build_transactions, mine_beam, mine_topk, render_table, to_jsonl};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{self as art, check_link, verify_step, write_atomic, StepWriter};
use crate::config::{PipelineConfig, SearchKind};
use crate::error::{CliError, Result};

/// Decision threshold applied to predicted probabilities.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub config_fingerprint: String,
    pub train_fingerprint: String,
    pub test_fingerprint: String,
    pub threshold: f64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecsFile {
    pub config_fingerprint: String,
    pub train_fingerprint: String,
    pub specs: Vec<MembershipSpec>,
}

struct Run {
    dir: std::path::PathBuf,
    fp: String,
}

impl Run {
    fn start(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let dir = cfg.output_dir();
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::internal(format!("creating {}: {e}", dir.display())))?;
        write_atomic(&dir, art::CONFIG, cfg.effective_json().as_bytes())?;
        Ok(Self { dir, fp: cfg.fingerprint() })
    }

    fn step(&self, name: &str) -> StepWriter {
        StepWriter::new(&self.dir, name, &self.fp)
    }

    fn verify(&self, step: &str) -> Result<art::Manifest> {
        verify_step(&self.dir, step, &self.fp)
    }
}

struct Data {
    input_bytes: Vec<u8>,
    train: ColumnarDataset,
    test: ColumnarDataset,
}

fn load_data(cfg: &PipelineConfig) -> Result<Data> {
    let input_bytes = std::fs::read(&cfg.input)
        .map_err(|source| DatasetError::Io { path: cfg.input.clone(), source })?;
    let ds = parse_csv(&input_bytes, &cfg.label_column, &cfg.positive_label)?;
    let ds = drop_columns(&ds, &cfg.drop_columns)?;
    let (train, test) = split(&ds, &cfg.split)?;
    Ok(Data { input_bytes, train, test })
}

fn expect_split(m: &art::Manifest, name: &str, actual: &str) -> Result<()> {
    match m.splits.get(name) {
        Some(fp) if fp == actual => Ok(()),
        _ => Err(CliError::lineage(format!("{name} split differs from the one recorded by {}", m.step))),
    }
}

fn importance_table(
    cfg: &PipelineConfig,
    model: &gbdt::BoostedModel,
    train: &ColumnarDataset,
) -> Result<(ImportanceTable, Option<Vec<u8>>)> {
    let method = cfg.importance.method.expect("validated");
    if method != ImportanceMethod::External {
        return Ok((importance(model, train, method)?, None));
    }
    let path = cfg.importance.path.as_deref().expect("validated");
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::input("Io", format!("failed to read `{path}`: {e}")))?;
    let text = String::from_utf8_lossy(&bytes);
    let table = parse_importance(&text)?;
    for f in &model.feature_names {
        if table.get(f).is_none() {
            return Err(CliError::input("MissingImportance", format!("no importance for feature `{f}` in {path}")));
        }
    }
    Ok((table, Some(bytes)))
}

/// Trains the baseline model and writes the model, importance table and
/// baseline test metrics.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let run = Run::start(cfg)?;
    let data = load_data(cfg)?;
    info!("train split: {} rows, test split: {} rows", data.train.n_rows(), data.test.n_rows());
    let model = gbdt::train(&data.train, &cfg.boost)?;
    let (imp, external) = importance_table(cfg, &model, &data.train)?;
    for f in imp.zero_features() {
        warn!("feature `{f}` has zero importance; its items will be dropped from mining");
    }
    let metrics = evaluate(data.test.label(), &predict_proba(&model, &data.test)?, THRESHOLD)?;
    info!(
        "baseline: auc {:.4} accuracy {:.4} recall {:.4} precision {:.4} f1 {:.4}",
        metrics.auc, metrics.accuracy, metrics.recall, metrics.precision, metrics.f1
    );
    let mfile = MetricsFile {
        config_fingerprint: run.fp.clone(),
        train_fingerprint: data.train.fingerprint().into(),
        test_fingerprint: data.test.fingerprint().into(),
        threshold: THRESHOLD,
        metrics,
    };

    let mut w = run.step("train");
    w.split("train", data.train.fingerprint()).split("test", data.test.fingerprint());
    w.input("input", &data.input_bytes);
    if let Some(b) = &external {
        w.input("external_importance", b);
    }
    w.output(art::MODEL, (model.to_json() + "\n").as_bytes())?;
    w.output(art::IMPORTANCE, imp.to_csv().as_bytes())?;
    w.output(art::METRICS, art::to_json(&mfile).as_bytes())?;
    w.finish()?;
    Ok(())
}

/// Fits membership functions on the training split and writes them with
/// the training split's item frame.
pub fn cmd_fuzzify(cfg: &PipelineConfig) -> Result<()> {
    let run = Run::start(cfg)?;
    let train_m = run.verify("train")?;
    let data = load_data(cfg)?;
    expect_split(&train_m, "train", data.train.fingerprint())?;

    let opts = FuzzifyOptions { alpha: cfg.normality_alpha, subsample_seed: cfg.subsample_seed };
    let specs = fit_specs(&data.train, &opts)?;
    if specs.is_empty() {
        warn!("no numeric feature columns; the spec file is empty");
    }
    for s in &specs {
        info!(
            "{}: W {:.4} p {:.4} -> {:?}",
            s.column, s.normality.w_statistic, s.normality.p_value, s.family()
        );
    }
    let frame = to_binary_frame(&data.train, &specs)?;
    let sfile = SpecsFile {
        config_fingerprint: run.fp.clone(),
        train_fingerprint: data.train.fingerprint().into(),
        specs,
    };

    let mut w = run.step("fuzzify");
    w.split("train", data.train.fingerprint());
    w.input("input", &data.input_bytes);
    w.output(art::SPECS, art::to_json(&sfile).as_bytes())?;
    w.output(art::FRAME, (frame.to_json() + "\n").as_bytes())?;
    w.finish()?;
    Ok(())
}

/// Mines the top-k patterns over the churned training rows.
pub fn cmd_mine(cfg: &PipelineConfig) -> Result<()> {
    let run = Run::start(cfg)?;
    let frame_bytes = art::read_artifact(&run.dir, art::FRAME)?;
    let imp_text = art::read_text(&run.dir, art::IMPORTANCE)?;
    let train_m = run.verify("train")?;
    let fuzz_m = run.verify("fuzzify")?;

    let frame: BinaryFrame = serde_json::from_slice(&frame_bytes)
        .map_err(|e| CliError::input("MalformedArtifact", format!("{}: {e}", art::FRAME)))?;
    let train_fp = train_m.splits.get("train").cloned().unwrap_or_default();
    expect_split(&fuzz_m, "train", &train_fp)?;
    if frame.source_fingerprint != train_fp {
        return Err(CliError::lineage("item frame was not built from the training split"));
    }
    let imp = parse_importance(&imp_text)?;
    let (db, pt) = build_transactions(&frame, &frame.labels, &imp, cfg.mining.mode)?;
    db.ensure_source(&train_fp)?;
    info!("{} churn transactions over {} items", db.len(), db.items.len());
    let mcfg = cfg.mining.miner_config();
    let patterns = match cfg.mining.search {
        SearchKind::Exact => mine_topk(&db, &pt, &mcfg)?,
        SearchKind::Beam => mine_beam(&db, &pt, &mcfg)?,
    };
    if patterns.len() < mcfg.k {
        warn!("only {} qualifying patterns for k = {}", patterns.len(), mcfg.k);
    }

    let mut w = run.step("mine");
    w.split("train", &train_fp);
    w.input(art::FRAME, &frame_bytes).input(art::IMPORTANCE, imp_text.as_bytes());
    w.output(art::PATTERNS, to_jsonl(&patterns).as_bytes())?;
    w.output(art::PATTERNS_TABLE, render_table(&patterns).as_bytes())?;
    w.finish()?;
    Ok(())
}

/// Retrains with each mined pattern as an extra feature and writes the
/// comparison against the baseline.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<()> {
    let run = Run::start(cfg)?;
    let patterns_text = art::read_text(&run.dir, art::PATTERNS)?;
    let specs_bytes = art::read_artifact(&run.dir, art::SPECS)?;
    let metrics_bytes = art::read_artifact(&run.dir, art::METRICS)?;
    let train_m = run.verify("train")?;
    let fuzz_m = run.verify("fuzzify")?;
    let mine_m = run.verify("mine")?;
    check_link(&fuzz_m, &mine_m, art::FRAME)?;
    check_link(&train_m, &mine_m, art::IMPORTANCE)?;

    let data = load_data(cfg)?;
    expect_split(&train_m, "train", data.train.fingerprint())?;
    expect_split(&train_m, "test", data.test.fingerprint())?;
    expect_split(&fuzz_m, "train", data.train.fingerprint())?;
    expect_split(&mine_m, "train", data.train.fingerprint())?;

    let patterns = miner::from_jsonl(&patterns_text)
        .map_err(|e| CliError::input("MalformedArtifact", format!("{}: {e}", art::PATTERNS)))?;
    let sfile: SpecsFile = serde_json::from_slice(&specs_bytes)
        .map_err(|e| CliError::input("MalformedArtifact", format!("{}: {e}", art::SPECS)))?;
    let mfile: MetricsFile = serde_json::from_slice(&metrics_bytes)
        .map_err(|e| CliError::input("MalformedArtifact", format!("{}: {e}", art::METRICS)))?;

    let rows = (1..=patterns.len())
        .into_par_iter()
        .map(|i| {
            let m = if cfg.cumulative {
                let set: Vec<_> = patterns[..i].iter().enumerate().map(|(j, p)| (j + 1, p)).collect();
                evaluate_with_patterns(&data.train, &data.test, &sfile.specs, &set, &cfg.boost)?
            } else {
                evaluate_with_pattern(&data.train, &data.test, &sfile.specs, &patterns[i - 1], i, &cfg.boost)?
            };
            Ok((i, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = ReportProvenance {
        config_fingerprint: run.fp.clone(),
        seed: cfg.split.seed,
        params: cfg.boost.clone(),
        k: cfg.mining.k,
        cumulative: cfg.cumulative,
    };
    let mut report = build_report(mfile.metrics, &rows, provenance)?;
    report.external = cfg.external_baselines.iter().map(|b| (b.name.clone(), b.metrics)).collect();

    let mut w = run.step("report");
    w.split("train", data.train.fingerprint()).split("test", data.test.fingerprint());
    w.input(art::PATTERNS, patterns_text.as_bytes())
        .input(art::SPECS, &specs_bytes)
        .input(art::METRICS, &metrics_bytes);
    w.output(art::REPORT_JSON, (report.to_json() + "\n").as_bytes())?;
    w.output(art::REPORT_MD, report.to_markdown().as_bytes())?;
    w.finish()?;
    Ok(())
}

pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<()> {
    cmd_train(cfg)?;
    cmd_fuzzify(cfg)?;
    cmd_mine(cfg)?;
    cmd_report(cfg)
}
