//! Pipeline configuration: a JSON document with `--dotted.key value`
//! command-line overrides.

use std::path::{Path, PathBuf};

use hafcp::dataset::SplitSpec;
use hafcp::fingerprint::sha256_hex;
use hafcp::fuzzify::DEFAULT_ALPHA;
use hafcp::gbdt::{BoostParams, ImportanceMethod, Metrics};
use hafcp::miner::{MiningConfig, UtilityMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceConfig {
    /// Required; there is no default method.
    pub method: Option<ImportanceMethod>,
    /// Source file when `method` is `external`.
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    #[default]
    Exact,
    Beam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSection {
    pub k: usize,
    pub min_length: usize,
    pub max_length: Option<usize>,
    pub mode: UtilityMode,
    pub search: SearchKind,
}

impl Default for MiningSection {
    fn default() -> Self {
        let m = MiningConfig::default();
        Self {
            k: m.k,
            min_length: m.min_length,
            max_length: m.max_length,
            mode: UtilityMode::Binary,
            search: SearchKind::Exact,
        }
    }
}

impl MiningSection {
    pub fn miner_config(&self) -> MiningConfig {
        MiningConfig { k: self.k, min_length: self.min_length, max_length: self.max_length }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalBaseline {
    pub name: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: String,
    pub label_column: String,
    pub positive_label: String,
    pub drop_columns: Vec<String>,
    pub split: SplitSpec,
    pub boost: BoostParams,
    pub importance: ImportanceConfig,
    pub normality_alpha: f64,
    pub subsample_seed: u64,
    pub mining: MiningSection,
    /// Top-i rows use patterns 1..=i together instead of pattern i alone.
    pub cumulative: bool,
    pub external_baselines: Vec<ExternalBaseline>,
    pub output_dir: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: String::new(),
            label_column: String::new(),
            positive_label: String::new(),
            drop_columns: Vec::new(),
            split: SplitSpec::default(),
            boost: BoostParams::default(),
            importance: ImportanceConfig::default(),
            normality_alpha: DEFAULT_ALPHA,
            subsample_seed: 0,
            mining: MiningSection::default(),
            cumulative: false,
            external_baselines: Vec::new(),
            output_dir: "out".into(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::input("InvalidConfig", msg)
}

impl PipelineConfig {
    /// Reads the optional config file and applies overrides given as
    /// `--a.b value` or `--a.b=value`.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(Self::default()).expect("default config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read config `{}`: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| config_error(format!("config `{}`: {e}", path.display())))?;
            merge(&mut doc, user);
        }
        for (key, value) in parse_overrides(overrides)? {
            set_path(&mut doc, &key, &value)?;
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_empty() {
            return Err(config_error("`input` is required"));
        }
        if self.label_column.is_empty() {
            return Err(config_error("`label_column` is required"));
        }
        if self.positive_label.is_empty() {
            return Err(config_error("`positive_label` is required"));
        }
        match (self.importance.method, &self.importance.path) {
            (None, _) => {
                return Err(config_error(
                    "`importance.method` is required: gain, path_attribution or external",
                ))
            }
            (Some(ImportanceMethod::External), None) => {
                return Err(config_error("`importance.path` is required for external importance"))
            }
            _ => {}
        }
        if !(self.normality_alpha > 0.0 && self.normality_alpha < 1.0) {
            return Err(config_error("`normality_alpha` must lie in (0, 1)"));
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(config_error("`split.train_fraction` must lie in (0, 1)"));
        }
        self.boost.validate()?;
        self.mining.miner_config().validate()?;
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(&self.output_dir)
    }

    /// The config as written beside the outputs. The output directory is
    /// normalised so that the same run written to two places is identical.
    pub fn effective_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = ".".into();
        serde_json::to_string_pretty(&c).expect("config serializes") + "\n"
    }

    pub fn fingerprint(&self) -> String {
        sha256_hex(self.effective_json().as_bytes())
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| config_error(format!("expected `--key value`, got `{arg}`")))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| config_error(format!("missing value for `--{key}`")))?;
                out.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

/// Sets a dotted path. Values are parsed as JSON unless the current value
/// is a string or the text is not valid JSON.
fn set_path(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let mut node = doc;
    for part in key.split('.') {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_error(format!("`{key}` does not name a config field")))?;
        if !obj.contains_key(part) {
            return Err(config_error(format!("unknown config field `{key}`")));
        }
        node = obj.get_mut(part).expect("checked");
    }
    *node = match node {
        Value::String(_) => Value::String(raw.to_string()),
        _ => serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())),
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    fn base() -> Vec<String> {
        args(&["--input", "x.csv", "--label_column", "Churn", "--positive_label", "1", "--importance.method", "gain"])
    }

    #[test]
    fn overrides_apply() {
        let mut a = base();
        a.extend(args(&["--mining.k", "7", "--boost.max_depth=3", "--mining.max_length", "4", "--drop_columns", "[\"ID\"]"]));
        let c = PipelineConfig::load(None, &a).unwrap();
        assert_eq!(c.mining.k, 7);
        assert_eq!(c.boost.max_depth, 3);
        assert_eq!(c.mining.max_length, Some(4));
        assert_eq!(c.drop_columns, vec!["ID"]);
        assert_eq!(c.importance.method, Some(ImportanceMethod::Gain));
    }

    #[test]
    fn string_fields_stay_strings() {
        let mut a = base();
        a.extend(args(&["--positive_label", "1"]));
        assert_eq!(PipelineConfig::load(None, &a).unwrap().positive_label, "1");
    }

    #[test]
    fn validation() {
        let mut a = base();
        a.extend(args(&["--mining.k", "0"]));
        assert_eq!(PipelineConfig::load(None, &a).unwrap_err().name, "InvalidConfig");
        assert!(PipelineConfig::load(None, &args(&["--input", "x"])).is_err());
        let mut a = base();
        a.extend(args(&["--nope", "1"]));
        assert!(PipelineConfig::load(None, &a).is_err());
    }

    #[test]
    fn fingerprint_ignores_output_dir() {
        let a = PipelineConfig::load(None, &base()).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.split.seed = 9;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
