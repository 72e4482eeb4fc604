//! Layered experiment configuration: internal defaults, then an external
//! config file, then command-line overrides. Later layers win, and every
//! effective value remembers which layer supplied it.

use crate::rational::{parse_rational, Rational};
use num_traits::Signed;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}' expects {expected}, got {found}")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("key '{key}': {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("config file {path}: {reason}")]
    File { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Internal,
    External,
    CommandLine,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Internal => write!(f, "internal"),
            Layer::External => write!(f, "external"),
            Layer::CommandLine => write!(f, "command-line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ConfigValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    IntList(Vec<i64>),
    StrList(Vec<String>),
}

impl ConfigValue {
    fn type_name(&self) -> &'static str {
        match self {
            ConfigValue::Int(_) => "integer",
            ConfigValue::Float(_) => "float",
            ConfigValue::Bool(_) => "boolean",
            ConfigValue::Str(_) => "string",
            ConfigValue::IntList(_) => "integer list",
            ConfigValue::StrList(_) => "string list",
        }
    }
}

impl fmt::Display for ConfigValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigValue::Int(v) => write!(f, "{v}"),
            ConfigValue::Float(v) => write!(f, "{v}"),
            ConfigValue::Bool(v) => write!(f, "{v}"),
            ConfigValue::Str(v) => write!(f, "{v}"),
            ConfigValue::IntList(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            ConfigValue::StrList(v) => write!(f, "{}", v.join(",")),
        }
    }
}

/// `(key, default)` pairs; the default also fixes each key's type.
fn schema() -> Vec<(&'static str, ConfigValue)> {
    use ConfigValue::*;
    vec![
        ("seed", Int(42)),
        ("data.path", Str(String::new())),
        ("data.adapter", Str("unified".to_string())),
        ("data.skip_invalid", Bool(false)),
        ("data.test_path", Str(String::new())),
        ("split.mode", Str("k_fold".to_string())),
        ("split.k", Int(5)),
        ("split.train_ratio", Float(0.8)),
        ("split.subset_tag", Str(String::new())),
        ("model.name", Str("retrieval".to_string())),
        ("model.k_neighbors", Int(1)),
        ("model.weighting", Str("uniform".to_string())),
        // answer-comparison threshold; kept as a string so it parses to an
        // exact rational (the benchmark value 1e-5 is the default)
        ("eval.tolerance", Str("1e-5".to_string())),
        ("run.id", Str(String::new())),
        ("run.output_dir", Str("runs".to_string())),
        ("run.pooled", Bool(false)),
        ("search.strategy", Str("grid".to_string())),
        ("search.budget", Int(0)),
        ("search.k_neighbors", IntList(vec![])),
        ("search.weighting", StrList(vec![])),
        ("search.validation_ratio", Float(0.2)),
    ]
}

/// Resolved configuration with per-key provenance.
#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, (ConfigValue, Layer)>,
}

impl Config {
    /// Internal defaults only.
    pub fn defaults() -> Config {
        let values = schema()
            .into_iter()
            .map(|(key, value)| (key.to_string(), (value, Layer::Internal)))
            .collect();
        Config { values }
    }

    pub(crate) fn set(&mut self, key: &str, value: ConfigValue, layer: Layer) -> Result<(), ConfigError> {
        let slot = self
            .values
            .get_mut(key)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        let coerced = match (&slot.0, value) {
            // integers are acceptable where floats are expected
            (ConfigValue::Float(_), ConfigValue::Int(v)) => ConfigValue::Float(v as f64),
            (expected, value) if expected.type_name() == value.type_name() => value,
            (expected, value) => {
                return Err(ConfigError::TypeMismatch {
                    key: key.to_string(),
                    expected: expected.type_name(),
                    found: format!("{} ({})", value.type_name(), value),
                })
            }
        };
        *slot = (coerced, layer);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&ConfigValue> {
        self.values.get(key).map(|(v, _)| v)
    }

    pub fn layer(&self, key: &str) -> Option<Layer> {
        self.values.get(key).map(|(_, l)| *l)
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Some(ConfigValue::Int(v)) => *v,
            other => panic!("schema key '{key}' is not an integer: {other:?}"),
        }
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Some(ConfigValue::Float(v)) => *v,
            other => panic!("schema key '{key}' is not a float: {other:?}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Some(ConfigValue::Bool(v)) => *v,
            other => panic!("schema key '{key}' is not a boolean: {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Some(ConfigValue::Str(v)) => v,
            other => panic!("schema key '{key}' is not a string: {other:?}"),
        }
    }

    pub fn int_list(&self, key: &str) -> &[i64] {
        match self.get(key) {
            Some(ConfigValue::IntList(v)) => v,
            other => panic!("schema key '{key}' is not an integer list: {other:?}"),
        }
    }

    pub fn str_list(&self, key: &str) -> &[String] {
        match self.get(key) {
            Some(ConfigValue::StrList(v)) => v,
            other => panic!("schema key '{key}' is not a string list: {other:?}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("seed") as u64
    }

    pub fn tolerance(&self) -> Rational {
        parse_rational(self.str("eval.tolerance")).expect("validated at resolution")
    }

    /// Provenance-carrying snapshot, ordered by key.
    pub fn snapshot(&self) -> BTreeMap<String, SnapshotEntry> {
        self.values
            .iter()
            .map(|(key, (value, layer))| {
                (
                    key.clone(),
                    SnapshotEntry {
                        value: value.clone(),
                        layer: *layer,
                    },
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub value: ConfigValue,
    pub layer: Layer,
}

/// Assemble the effective configuration.
///
/// Precedence: command line over external file over internal defaults.
/// Unknown keys and type mismatches are rejected at whichever layer
/// introduces them.
pub fn resolve_config(
    external: Option<&Path>,
    cli_pairs: &[(String, String)],
) -> Result<Config, ConfigError> {
    let mut config = Config::defaults();
    if let Some(path) = external {
        apply_external_file(&mut config, path)?;
    }
    for (key, raw) in cli_pairs {
        let value = parse_cli_value(&config, key, raw)?;
        config.set(key, value, Layer::CommandLine)?;
    }
    validate(&config)?;
    Ok(config)
}

fn apply_external_file(config: &mut Config, path: &Path) -> Result<(), ConfigError> {
    let raw = fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let table: toml::Table = raw.parse().map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        reason: format!("not valid TOML: {e}"),
    })?;
    let mut flat = Vec::new();
    flatten_toml(&table, String::new(), &mut flat)?;
    for (key, value) in flat {
        config.set(&key, value, Layer::External)?;
    }
    Ok(())
}

fn flatten_toml(
    table: &toml::Table,
    prefix: String,
    out: &mut Vec<(String, ConfigValue)>,
) -> Result<(), ConfigError> {
    for (name, value) in table {
        let key = if prefix.is_empty() {
            name.clone()
        } else {
            format!("{prefix}.{name}")
        };
        match value {
            toml::Value::Table(inner) => flatten_toml(inner, key, out)?,
            other => out.push((key.clone(), toml_value(&key, other)?)),
        }
    }
    Ok(())
}

fn toml_value(key: &str, value: &toml::Value) -> Result<ConfigValue, ConfigError> {
    let mismatch = |found: String| ConfigError::TypeMismatch {
        key: key.to_string(),
        expected: "a scalar or homogeneous list",
        found,
    };
    match value {
        toml::Value::Integer(v) => Ok(ConfigValue::Int(*v)),
        toml::Value::Float(v) => Ok(ConfigValue::Float(*v)),
        toml::Value::Boolean(v) => Ok(ConfigValue::Bool(*v)),
        toml::Value::String(v) => Ok(ConfigValue::Str(v.clone())),
        toml::Value::Array(items) => {
            if items.iter().all(|i| matches!(i, toml::Value::Integer(_))) {
                Ok(ConfigValue::IntList(
                    items.iter().filter_map(|i| i.as_integer()).collect(),
                ))
            } else if items.iter().all(|i| matches!(i, toml::Value::String(_))) {
                Ok(ConfigValue::StrList(
                    items
                        .iter()
                        .filter_map(|i| i.as_str().map(str::to_string))
                        .collect(),
                ))
            } else {
                Err(mismatch("mixed-type array".to_string()))
            }
        }
        other => Err(mismatch(other.type_str().to_string())),
    }
}

/// Parse a `--set key=value` string against the key's schema type.
fn parse_cli_value(config: &Config, key: &str, raw: &str) -> Result<ConfigValue, ConfigError> {
    let expected = config
        .get(key)
        .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
    let mismatch = || ConfigError::TypeMismatch {
        key: key.to_string(),
        expected: expected.type_name(),
        found: format!("'{raw}'"),
    };
    match expected {
        ConfigValue::Int(_) => raw.parse().map(ConfigValue::Int).map_err(|_| mismatch()),
        ConfigValue::Float(_) => raw.parse().map(ConfigValue::Float).map_err(|_| mismatch()),
        ConfigValue::Bool(_) => raw.parse().map(ConfigValue::Bool).map_err(|_| mismatch()),
        ConfigValue::Str(_) => Ok(ConfigValue::Str(raw.to_string())),
        ConfigValue::IntList(_) => raw
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse())
            .collect::<Result<Vec<i64>, _>>()
            .map(ConfigValue::IntList)
            .map_err(|_| mismatch()),
        ConfigValue::StrList(_) => Ok(ConfigValue::StrList(
            raw.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().to_string())
                .collect(),
        )),
    }
}

fn validate(config: &Config) -> Result<(), ConfigError> {
    let invalid = |key: &str, reason: String| ConfigError::InvalidValue {
        key: key.to_string(),
        reason,
    };
    match config.str("split.mode") {
        "k_fold" => {
            if config.int("split.k") < 2 {
                return Err(invalid("split.k", "k-fold mode needs k >= 2".to_string()));
            }
        }
        "train_test" => {
            let ratio = config.float("split.train_ratio");
            if config.str("data.test_path").is_empty() && !(0.0 < ratio && ratio < 1.0) {
                return Err(invalid(
                    "split.train_ratio",
                    format!("ratio {ratio} is outside (0, 1)"),
                ));
            }
        }
        "named_subset" => {
            if config.str("split.subset_tag").is_empty() {
                return Err(invalid(
                    "split.subset_tag",
                    "named_subset mode needs a tag".to_string(),
                ));
            }
        }
        other => {
            return Err(invalid(
                "split.mode",
                format!("'{other}' is not one of k_fold, train_test, named_subset"),
            ))
        }
    }
    if config.int("seed") < 0 {
        return Err(invalid("seed", "seed must be non-negative".to_string()));
    }
    if config.int("model.k_neighbors") < 1 {
        return Err(invalid("model.k_neighbors", "need at least one neighbor".to_string()));
    }
    match config.str("model.weighting") {
        "uniform" | "similarity" => {}
        other => {
            return Err(invalid(
                "model.weighting",
                format!("'{other}' is not one of uniform, similarity"),
            ))
        }
    }
    match parse_rational(config.str("eval.tolerance")) {
        Some(t) if t.is_positive() => {}
        _ => {
            return Err(invalid(
                "eval.tolerance",
                "tolerance must be a positive number".to_string(),
            ))
        }
    }
    match config.str("search.strategy") {
        "grid" | "random" => {}
        other => {
            return Err(invalid(
                "search.strategy",
                format!("'{other}' is not one of grid, random"),
            ))
        }
    }
    let ratio = config.float("search.validation_ratio");
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(invalid(
            "search.validation_ratio",
            format!("ratio {ratio} is outside (0, 1)"),
        ));
    }
    if config.int_list("search.k_neighbors").iter().any(|&k| k < 1) {
        return Err(invalid("search.k_neighbors", "neighbor counts must be >= 1".to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_pass_verbatim() {
        let config = resolve_config(None, &[]).unwrap();
        assert_eq!(config.int("split.k"), 5);
        assert_eq!(config.seed(), 42);
        assert_eq!(config.str("eval.tolerance"), "1e-5");
        assert_eq!(config.layer("split.k"), Some(Layer::Internal));
    }

    #[test]
    fn command_line_beats_internal() {
        let config = resolve_config(None, &pairs(&[("split.k", "10")])).unwrap();
        assert_eq!(config.int("split.k"), 10);
        assert_eq!(config.layer("split.k"), Some(Layer::CommandLine));
    }

    #[test]
    fn command_line_beats_external() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "seed = 42").unwrap();
        let config = resolve_config(Some(file.path()), &pairs(&[("seed", "7")])).unwrap();
        assert_eq!(config.seed(), 7);
        assert_eq!(config.layer("seed"), Some(Layer::CommandLine));

        let config = resolve_config(Some(file.path()), &[]).unwrap();
        assert_eq!(config.seed(), 42);
        assert_eq!(config.layer("seed"), Some(Layer::External));
    }

    #[test]
    fn external_tables_flatten_to_dotted_keys() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "[split]\nk = 7\n[search]\nk_neighbors = [1, 3]").unwrap();
        let config = resolve_config(Some(file.path()), &[]).unwrap();
        assert_eq!(config.int("split.k"), 7);
        assert_eq!(config.int_list("search.k_neighbors"), &[1, 3]);
    }

    #[test]
    fn rejects_unknown_keys_and_type_mismatches() {
        assert!(matches!(
            resolve_config(None, &pairs(&[("split.q", "1")])),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            resolve_config(None, &pairs(&[("split.k", "five")])),
            Err(ConfigError::TypeMismatch { .. })
        ));
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "nonsense = 3").unwrap();
        assert!(matches!(
            resolve_config(Some(file.path()), &[]),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn validates_mode_constraints() {
        assert!(resolve_config(None, &pairs(&[("split.k", "1")])).is_err());
        assert!(resolve_config(None, &pairs(&[("split.mode", "bogus")])).is_err());
        assert!(resolve_config(None, &pairs(&[("split.mode", "named_subset")])).is_err());
        assert!(resolve_config(
            None,
            &pairs(&[("split.mode", "named_subset"), ("split.subset_tag", "challenge")])
        )
        .is_ok());
        assert!(resolve_config(None, &pairs(&[("eval.tolerance", "0")])).is_err());
        assert!(resolve_config(None, &pairs(&[("eval.tolerance", "2e-3")])).is_ok());
    }

    #[test]
    fn cli_parses_lists() {
        let config = resolve_config(None, &pairs(&[("search.k_neighbors", "1,3,5")])).unwrap();
        assert_eq!(config.int_list("search.k_neighbors"), &[1, 3, 5]);
        let config = resolve_config(None, &pairs(&[("search.weighting", "uniform,similarity")])).unwrap();
        assert_eq!(config.str_list("search.weighting").len(), 2);
    }
}
