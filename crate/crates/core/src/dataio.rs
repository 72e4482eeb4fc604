//! Ingestion of raw math-word-problem datasets into the unified record
//! format, plus dataset statistics.
//!
//! The unified on-disk format is UTF-8, one JSON object per line with keys
//! `id`, `text`, `language`, `equations`, `answers` (`{name, value}` with
//! the value as an exact numeric string), and optional `subset`.

use crate::engine::BRIDGE_TOKEN;
use crate::rational::{format_rational, parse_rational, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("record {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
    #[error("unknown adapter '{0}'")]
    UnknownAdapter(String),
    #[error("duplicate record id '{0}'")]
    DuplicateId(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::En => write!(f, "en"),
            Language::Zh => write!(f, "zh"),
        }
    }
}

/// One math word problem in the unified schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemRecord {
    pub id: String,
    pub text: String,
    pub language: Language,
    pub gold_equations: Vec<String>,
    /// `(unknown name, exact value)` pairs, in file order.
    pub gold_answers: Vec<(String, Rational)>,
    /// Tag naming a designated test subset (e.g. a challenge set).
    pub subset_tag: Option<String>,
    pub source_dataset: String,
}

impl ProblemRecord {
    /// Check the record invariants; returns the violation, if any.
    pub fn validate(&self) -> Result<(), String> {
        if self.text.trim().is_empty() {
            return Err("text is empty".to_string());
        }
        if self.gold_equations.is_empty() {
            return Err("no gold equations".to_string());
        }
        if self.gold_answers.is_empty() {
            return Err("no gold answers".to_string());
        }
        if self.text.contains(BRIDGE_TOKEN)
            || self.gold_equations.iter().any(|e| e.contains(BRIDGE_TOKEN))
        {
            return Err(format!("reserved token {BRIDGE_TOKEN} appears in the record"));
        }
        for (name, _) in &self.gold_answers {
            let appears = self
                .gold_equations
                .iter()
                .any(|eq| identifier_words(eq).any(|w| w == *name));
            if !appears {
                return Err(format!("answer unknown '{name}' appears in no gold equation"));
            }
        }
        Ok(())
    }

    pub fn is_multi_equation(&self) -> bool {
        self.gold_equations.len() > 1
    }
}

/// Maximal identifier words in an equation string, without parsing it.
fn identifier_words(text: &str) -> impl Iterator<Item = String> + '_ {
    let mut words = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            current.push(c);
        } else if !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
        .into_iter()
        .filter(|w| w.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_'))
}

/// Aggregate counts for a record list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub num_examples: usize,
    /// Records whose target is more than one equation.
    pub num_multi_equation: usize,
    /// Records carrying a subset tag.
    pub num_hard_subset: usize,
    pub language: Option<Language>,
}

pub fn compute_stats(records: &[ProblemRecord]) -> DatasetStats {
    let language = match records.first() {
        Some(first) if records.iter().all(|r| r.language == first.language) => Some(first.language),
        _ => None,
    };
    DatasetStats {
        num_examples: records.len(),
        num_multi_equation: records.iter().filter(|r| r.is_multi_equation()).count(),
        num_hard_subset: records.iter().filter(|r| r.subset_tag.is_some()).count(),
        language,
    }
}

// --- unified format ---------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct AnswerJson {
    name: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordJson {
    id: String,
    text: String,
    language: Language,
    equations: Vec<String>,
    answers: Vec<AnswerJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

fn record_from_json(json: RecordJson, default_source: &str) -> Result<ProblemRecord, String> {
    let mut gold_answers = Vec::with_capacity(json.answers.len());
    for answer in json.answers {
        let value = parse_rational(&answer.value)
            .ok_or_else(|| format!("answer value '{}' is not a number", answer.value))?;
        gold_answers.push((answer.name, value));
    }
    Ok(ProblemRecord {
        id: json.id,
        text: json.text,
        language: json.language,
        gold_equations: json.equations,
        gold_answers,
        subset_tag: json.subset,
        source_dataset: json.source.unwrap_or_else(|| default_source.to_string()),
    })
}

fn record_to_json(record: &ProblemRecord) -> RecordJson {
    RecordJson {
        id: record.id.clone(),
        text: record.text.clone(),
        language: record.language,
        equations: record.gold_equations.clone(),
        answers: record
            .gold_answers
            .iter()
            .map(|(name, value)| AnswerJson {
                name: name.clone(),
                value: format_rational(value),
            })
            .collect(),
        subset: record.subset_tag.clone(),
        source: Some(record.source_dataset.clone()),
    }
}

// --- adapters ----------------------------------------------------------------

/// Registered raw-dataset formats.
///
/// Non-native adapters target the publicly circulated dumps of each
/// benchmark; `Mawps` also reads Draw1K, which shares its schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapter {
    Unified,
    Mawps,
    Math23k,
    Hmwp,
    Svamp,
    Asdiv,
}

impl Adapter {
    pub fn parse(name: &str) -> Result<Adapter, DataError> {
        match name.to_ascii_lowercase().as_str() {
            "unified" => Ok(Adapter::Unified),
            "mawps" | "draw1k" => Ok(Adapter::Mawps),
            "math23k" => Ok(Adapter::Math23k),
            "hmwp" => Ok(Adapter::Hmwp),
            "svamp" => Ok(Adapter::Svamp),
            "asdiv" | "asdiv-a" => Ok(Adapter::Asdiv),
            other => Err(DataError::UnknownAdapter(other.to_string())),
        }
    }

    fn source_name(self) -> &'static str {
        match self {
            Adapter::Unified => "unified",
            Adapter::Mawps => "mawps",
            Adapter::Math23k => "math23k",
            Adapter::Hmwp => "hmwp",
            Adapter::Svamp => "svamp",
            Adapter::Asdiv => "asdiv-a",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Log and drop records that fail invariants instead of aborting.
    pub skip_invalid: bool,
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub records: Vec<ProblemRecord>,
    /// `(record index, reason)` for records dropped under `skip_invalid`.
    pub skipped: Vec<(usize, String)>,
}

/// Load a dataset file through the named adapter. Any invariant violation
/// aborts the load; see [`load_dataset_opts`] for the lenient mode.
pub fn load_dataset(path: &Path, adapter: Adapter) -> Result<Vec<ProblemRecord>, DataError> {
    load_dataset_opts(path, adapter, LoadOptions::default()).map(|outcome| outcome.records)
}

pub fn load_dataset_opts(
    path: &Path,
    adapter: Adapter,
    options: LoadOptions,
) -> Result<LoadOutcome, DataError> {
    let raw = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let parsed = match adapter {
        Adapter::Unified => parse_unified(&raw)?,
        Adapter::Mawps => parse_mawps(&raw)?,
        Adapter::Math23k | Adapter::Hmwp => parse_math23k_like(&raw, adapter)?,
        Adapter::Svamp => parse_svamp(&raw)?,
        Adapter::Asdiv => parse_asdiv(&raw)?,
    };

    let mut records = Vec::with_capacity(parsed.len());
    let mut skipped = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (index, record) in parsed.into_iter().enumerate() {
        let record = match record {
            Ok(r) => r,
            Err(reason) => {
                if options.skip_invalid {
                    log::warn!("record {index}: dropped ({reason})");
                    skipped.push((index, reason));
                    continue;
                }
                return Err(DataError::MalformedRecord { index, reason });
            }
        };
        if let Err(reason) = record.validate() {
            if options.skip_invalid {
                log::warn!("record {index} ({}): dropped ({reason})", record.id);
                skipped.push((index, reason));
                continue;
            }
            return Err(DataError::MalformedRecord { index, reason });
        }
        if !seen_ids.insert(record.id.clone()) {
            if options.skip_invalid {
                let reason = format!("duplicate id '{}'", record.id);
                log::warn!("record {index}: dropped ({reason})");
                skipped.push((index, reason));
                continue;
            }
            return Err(DataError::DuplicateId(record.id));
        }
        records.push(record);
    }
    Ok(LoadOutcome { records, skipped })
}

/// Write records in the unified one-record-per-line format.
/// Reloading reproduces every field exactly.
pub fn write_unified(records: &[ProblemRecord], path: &Path) -> Result<(), DataError> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, &record_to_json(record)).expect("record serializes");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&out).map_err(io_err)
}

type ParsedRecords = Vec<Result<ProblemRecord, String>>;

fn parse_unified(raw: &str) -> Result<ParsedRecords, DataError> {
    Ok(raw
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            serde_json::from_str::<RecordJson>(line)
                .map_err(|e| format!("not a unified record: {e}"))
                .and_then(|json| record_from_json(json, "unified"))
        })
        .collect())
}

/// Top-level JSON of a raw dump: either an array or one object per line.
fn json_values(raw: &str, adapter: Adapter) -> Result<Vec<serde_json::Value>, DataError> {
    let trimmed = raw.trim_start();
    if trimmed.starts_with('[') {
        let values: Vec<serde_json::Value> =
            serde_json::from_str(raw).map_err(|e| DataError::MalformedRecord {
                index: 0,
                reason: format!("{} file is not a JSON array: {e}", adapter.source_name()),
            })?;
        return Ok(values);
    }
    raw.lines()
        .filter(|line| !line.trim().is_empty())
        .enumerate()
        .map(|(index, line)| {
            serde_json::from_str(line).map_err(|e| DataError::MalformedRecord {
                index,
                reason: format!("line is not JSON: {e}"),
            })
        })
        .collect()
}

fn field_string(value: &serde_json::Value, keys: &[&str]) -> Option<String> {
    for key in keys {
        match value.get(key) {
            Some(serde_json::Value::String(s)) => return Some(s.clone()),
            Some(serde_json::Value::Number(n)) => return Some(n.to_string()),
            _ => {}
        }
    }
    None
}

/// MAWPS/Draw1K schema: `iIndex`, `sQuestion`, `lEquations`, `lSolutions`.
fn parse_mawps(raw: &str) -> Result<ParsedRecords, DataError> {
    let values = json_values(raw, Adapter::Mawps)?;
    Ok(values.iter().map(|v| mawps_record(v)).collect())
}

fn mawps_record(value: &serde_json::Value) -> Result<ProblemRecord, String> {
    let id = field_string(value, &["iIndex", "id", "ID"]).ok_or("missing iIndex")?;
    let text = field_string(value, &["sQuestion", "original_text"]).ok_or("missing sQuestion")?;
    let equations: Vec<String> = value
        .get("lEquations")
        .and_then(|e| e.as_array())
        .map(|arr| arr.iter().filter_map(|e| e.as_str().map(normalize_equation)).collect())
        .ok_or("missing lEquations")?;
    let solutions = value
        .get("lSolutions")
        .and_then(|s| s.as_array())
        .ok_or("missing lSolutions")?;
    let unknowns = ordered_unknowns(&equations);
    let mut gold_answers = Vec::new();
    for (i, solution) in solutions.iter().enumerate() {
        let value = json_number(solution).ok_or_else(|| format!("solution {i} is not numeric"))?;
        let name = unknowns.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
        gold_answers.push((name, value));
    }
    Ok(ProblemRecord {
        id,
        text,
        language: Language::En,
        gold_equations: equations,
        gold_answers,
        subset_tag: None,
        source_dataset: "mawps".to_string(),
    })
}

/// Math23K/HMWP schema: `id`, `original_text`, `equation`, `ans`.
/// HMWP multi-equation targets arrive `;`-separated or as a list.
fn parse_math23k_like(raw: &str, adapter: Adapter) -> Result<ParsedRecords, DataError> {
    let values = json_values(raw, adapter)?;
    Ok(values.iter().map(|v| math23k_record(v, adapter)).collect())
}

fn math23k_record(value: &serde_json::Value, adapter: Adapter) -> Result<ProblemRecord, String> {
    let id = field_string(value, &["id", "ID"]).ok_or("missing id")?;
    let text =
        field_string(value, &["original_text", "segmented_text", "text"]).ok_or("missing original_text")?;
    let equations: Vec<String> = match value.get("equation") {
        Some(serde_json::Value::String(s)) => s
            .split(';')
            .map(|part| normalize_equation(part.trim()))
            .filter(|part| !part.is_empty())
            .collect(),
        Some(serde_json::Value::Array(parts)) => parts
            .iter()
            .filter_map(|p| p.as_str().map(normalize_equation))
            .collect(),
        _ => return Err("missing equation".to_string()),
    };
    let answers = match value.get("ans") {
        Some(serde_json::Value::Array(values)) => values
            .iter()
            .map(|v| json_number(v).ok_or("answer is not numeric".to_string()))
            .collect::<Result<Vec<_>, _>>()?,
        Some(v) => vec![json_number(v).ok_or("answer is not numeric")?],
        None => return Err("missing ans".to_string()),
    };
    let unknowns = ordered_unknowns(&equations);
    let gold_answers = answers
        .into_iter()
        .enumerate()
        .map(|(i, v)| (unknowns.get(i).cloned().unwrap_or_else(|| format!("x{i}")), v))
        .collect();
    Ok(ProblemRecord {
        id,
        text,
        language: Language::Zh,
        gold_equations: equations,
        gold_answers,
        subset_tag: None,
        source_dataset: adapter.source_name().to_string(),
    })
}

/// SVAMP challenge-set schema: `ID`, `Body`, `Question`, `Equation`, `Answer`.
/// Every record is tagged as the challenge subset.
fn parse_svamp(raw: &str) -> Result<ParsedRecords, DataError> {
    let values = json_values(raw, Adapter::Svamp)?;
    Ok(values
        .iter()
        .map(|value| {
            let id = field_string(value, &["ID", "id"]).ok_or("missing ID")?;
            let body = field_string(value, &["Body"]).ok_or("missing Body")?;
            let question = field_string(value, &["Question"]).unwrap_or_default();
            let equation = field_string(value, &["Equation"]).ok_or("missing Equation")?;
            let answer = value.get("Answer").and_then(json_number).ok_or("missing Answer")?;
            let equation = ensure_unknown(&normalize_equation(&equation));
            Ok(ProblemRecord {
                id,
                text: format!("{} {}", body.trim(), question.trim()).trim().to_string(),
                language: Language::En,
                gold_equations: vec![equation],
                gold_answers: vec![("x".to_string(), answer)],
                subset_tag: Some("challenge".to_string()),
                source_dataset: "svamp".to_string(),
            })
        })
        .collect())
}

/// ASDiv-a schema: `@ID`/`ID`, `Body`, `Question`, `Formula`, `Answer`.
fn parse_asdiv(raw: &str) -> Result<ParsedRecords, DataError> {
    let values = json_values(raw, Adapter::Asdiv)?;
    Ok(values
        .iter()
        .map(|value| {
            let id = field_string(value, &["@ID", "ID", "id"]).ok_or("missing ID")?;
            let body = field_string(value, &["Body"]).ok_or("missing Body")?;
            let question = field_string(value, &["Question"]).unwrap_or_default();
            let formula = field_string(value, &["Formula", "Equation"]).ok_or("missing Formula")?;
            // "26-9=17" form: split off the stated result
            let (equation, stated) = match formula.rsplit_once('=') {
                Some((lhs, rhs)) if parse_rational(rhs.trim()).is_some() => {
                    (lhs.trim().to_string(), parse_rational(rhs.trim()))
                }
                _ => (formula.clone(), None),
            };
            let answer = value
                .get("Answer")
                .and_then(json_number)
                .or_else(|| {
                    field_string(value, &["Answer"])
                        .and_then(|s| parse_rational(s.split_whitespace().next().unwrap_or("")))
                })
                .or(stated)
                .ok_or("missing Answer")?;
            let equation = ensure_unknown(&normalize_equation(&equation));
            Ok(ProblemRecord {
                id,
                text: format!("{} {}", body.trim(), question.trim()).trim().to_string(),
                language: Language::En,
                gold_equations: vec![equation],
                gold_answers: vec![("x".to_string(), answer)],
                subset_tag: None,
                source_dataset: "asdiv-a".to_string(),
            })
        })
        .collect())
}

fn json_number(value: &serde_json::Value) -> Option<Rational> {
    match value {
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s.trim().trim_end_matches('%')).map(|v| {
            if s.trim().ends_with('%') {
                v / Rational::from_integer(100.into())
            } else {
                v
            }
        }),
        _ => None,
    }
}

/// Light normalization of raw equation strings: unicode operators and the
/// conventional uppercase unknowns.
fn normalize_equation(raw: &str) -> String {
    raw.trim()
        .replace('×', "*")
        .replace('÷', "/")
        .replace('−', "-")
        .replace('X', "x")
        .replace('Y', "y")
        .replace('Z', "z")
}

/// Expression-only golds ("26 - 9") become `x = <expr>`.
fn ensure_unknown(equation: &str) -> String {
    if equation.contains('=') {
        equation.to_string()
    } else {
        format!("x = {equation}")
    }
}

/// Unknown names appearing across the equations, in order of appearance.
fn ordered_unknowns(equations: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for equation in equations {
        for word in identifier_words(equation) {
            if !out.contains(&word) {
                out.push(word);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use std::io::Write;

    fn write_fixture(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    const PACO_LINE: &str = r#"{"id":"paco","text":"Paco had 26 salty cookies and 17 sweet cookies. He ate 14 sweet cookies and 9 salty cookies. How many salty cookies did Paco have left?","language":"en","equations":["x = 26 - 9"],"answers":[{"name":"x","value":"17"}]}"#;
    const JEROME_LINE: &str = r#"{"id":"jerome","text":"Jerome bought 12 CDs. Some cost 7.50$ each, and the rest cost 6.50 each . How many CDs were bought at each price if he spent 82 dollars?","language":"en","equations":["7.5 * x + 6.5 * y = 82","x + y = 12"],"answers":[{"name":"x","value":"4"},{"name":"y","value":"8"}]}"#;

    #[test]
    fn loads_two_record_fixture_in_file_order() {
        let file = write_fixture(&format!("{PACO_LINE}\n{JEROME_LINE}\n"));
        let records = load_dataset(file.path(), Adapter::Unified).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].id, "paco");
        assert_eq!(records[1].id, "jerome");
    }

    #[test]
    fn paco_record_parses_answer_exactly() {
        let file = write_fixture(PACO_LINE);
        let records = load_dataset(file.path(), Adapter::Unified).unwrap();
        assert_eq!(records[0].gold_answers, vec![("x".to_string(), int(17))]);
        assert_eq!(records[0].gold_equations, vec!["x = 26 - 9"]);
    }

    #[test]
    fn jerome_record_has_two_equations_and_answers() {
        let file = write_fixture(JEROME_LINE);
        let records = load_dataset(file.path(), Adapter::Unified).unwrap();
        assert_eq!(records[0].gold_equations.len(), 2);
        assert_eq!(
            records[0].gold_answers,
            vec![("x".to_string(), int(4)), ("y".to_string(), int(8))]
        );
        assert!(records[0].is_multi_equation());
    }

    #[test]
    fn decimal_answers_become_exact_rationals() {
        let line = r#"{"id":"a","text":"costs 7.5 dollars","language":"en","equations":["x = 7.5"],"answers":[{"name":"x","value":"7.5"}]}"#;
        let file = write_fixture(line);
        let records = load_dataset(file.path(), Adapter::Unified).unwrap();
        assert_eq!(records[0].gold_answers[0].1, ratio(15, 2));
    }

    #[test]
    fn stats_of_empty_list_are_zero() {
        let stats = compute_stats(&[]);
        assert_eq!(stats.num_examples, 0);
        assert_eq!(stats.num_multi_equation, 0);
        assert_eq!(stats.num_hard_subset, 0);
        assert_eq!(stats.language, None);
    }

    fn synthetic_record(id: usize, multi: bool, tagged: bool) -> ProblemRecord {
        ProblemRecord {
            id: format!("r{id}"),
            text: format!("record {id} has {} items", id + 1),
            language: Language::En,
            gold_equations: if multi {
                vec!["x + y = 2".to_string(), "x - y = 0".to_string()]
            } else {
                vec!["x = 1".to_string()]
            },
            gold_answers: if multi {
                vec![("x".to_string(), int(1)), ("y".to_string(), int(1))]
            } else {
                vec![("x".to_string(), int(1))]
            },
            subset_tag: tagged.then(|| "hard".to_string()),
            source_dataset: "synthetic".to_string(),
        }
    }

    #[test]
    fn stats_count_multi_equation_records() {
        // 10 records, 3 of them multi-equation (hand count)
        let records: Vec<ProblemRecord> =
            (0..10).map(|i| synthetic_record(i, i < 3, false)).collect();
        let stats = compute_stats(&records);
        assert_eq!(stats.num_examples, 10);
        assert_eq!(stats.num_multi_equation, 3);
        assert_eq!(stats.language, Some(Language::En));
    }

    #[test]
    fn stats_are_order_invariant() {
        let mut records: Vec<ProblemRecord> =
            (0..8).map(|i| synthetic_record(i, i % 3 == 0, i % 2 == 0)).collect();
        let forward = compute_stats(&records);
        records.reverse();
        assert_eq!(compute_stats(&records), forward);
    }

    #[test]
    fn round_trips_unified_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let records: Vec<ProblemRecord> =
            (0..5).map(|i| synthetic_record(i, i == 2, i == 4)).collect();
        write_unified(&records, &path).unwrap();
        let reloaded = load_dataset(&path, Adapter::Unified).unwrap();
        assert_eq!(reloaded, records);
    }

    #[test]
    fn round_trips_chinese_text_and_subset_tag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zh.jsonl");
        let record = ProblemRecord {
            id: "zh1".to_string(),
            text: "小明有26个苹果，吃了9个，还剩几个？".to_string(),
            language: Language::Zh,
            gold_equations: vec!["x = 26 - 9".to_string()],
            gold_answers: vec![("x".to_string(), int(17))],
            subset_tag: Some("challenge".to_string()),
            source_dataset: "fixture".to_string(),
        };
        write_unified(std::slice::from_ref(&record), &path).unwrap();
        let reloaded = load_dataset(&path, Adapter::Unified).unwrap();
        assert_eq!(reloaded[0].text, record.text);
        assert_eq!(reloaded[0].subset_tag.as_deref(), Some("challenge"));
        assert_eq!(reloaded[0], record);
    }

    #[test]
    fn duplicate_ids_abort_ingestion() {
        let file = write_fixture(&format!("{PACO_LINE}\n{PACO_LINE}\n"));
        match load_dataset(file.path(), Adapter::Unified) {
            Err(DataError::DuplicateId(id)) => assert_eq!(id, "paco"),
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn invalid_records_abort_unless_skipped() {
        let missing_answers = r#"{"id":"bad","text":"no answers","language":"en","equations":["x = 1"],"answers":[]}"#;
        let file = write_fixture(&format!("{PACO_LINE}\n{missing_answers}\n"));
        match load_dataset(file.path(), Adapter::Unified) {
            Err(DataError::MalformedRecord { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected MalformedRecord, got {other:?}"),
        }
        let outcome = load_dataset_opts(
            file.path(),
            Adapter::Unified,
            LoadOptions { skip_invalid: true },
        )
        .unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.skipped.len(), 1);
        assert_eq!(outcome.skipped[0].0, 1);
    }

    #[test]
    fn answer_unknowns_must_appear_in_equations() {
        let bad = r#"{"id":"b","text":"has 3 things","language":"en","equations":["x = 3"],"answers":[{"name":"z","value":"3"}]}"#;
        let file = write_fixture(bad);
        assert!(matches!(
            load_dataset(file.path(), Adapter::Unified),
            Err(DataError::MalformedRecord { .. })
        ));
    }

    #[test]
    fn bridge_token_is_reserved() {
        let bad = r#"{"id":"b","text":"text with <bridge> inside 3","language":"en","equations":["x = 3"],"answers":[{"name":"x","value":"3"}]}"#;
        let file = write_fixture(bad);
        assert!(load_dataset(file.path(), Adapter::Unified).is_err());
    }

    #[test]
    fn unknown_adapter_is_rejected() {
        match Adapter::parse("gsm8k") {
            Err(DataError::UnknownAdapter(name)) => assert_eq!(name, "gsm8k"),
            other => panic!("expected UnknownAdapter, got {other:?}"),
        }
    }

    #[test]
    fn mawps_adapter_reads_public_schema() {
        let raw = r#"[
            {"iIndex": 1, "sQuestion": "Paco had 26 cookies and ate 9 . How many are left ?", "lEquations": ["X=26-9"], "lSolutions": [17.0]},
            {"iIndex": 2, "sQuestion": "Jerome bought 12 CDs at 7.5 and 6.5 for 82 dollars .", "lEquations": ["7.5*X+6.5*Y=82", "X+Y=12"], "lSolutions": [4, 8]}
        ]"#;
        let file = write_fixture(raw);
        let records = load_dataset(file.path(), Adapter::Mawps).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].gold_equations, vec!["x=26-9"]);
        assert_eq!(records[0].gold_answers, vec![("x".to_string(), int(17))]);
        assert_eq!(records[1].gold_answers.len(), 2);
        assert_eq!(records[1].gold_answers[1], ("y".to_string(), int(8)));
    }

    #[test]
    fn math23k_adapter_reads_public_schema() {
        let raw = r#"{"id": "1", "original_text": "小明有26个苹果，吃了9个，还剩几个？", "equation": "x=26-9", "ans": "17"}"#;
        let file = write_fixture(raw);
        let records = load_dataset(file.path(), Adapter::Math23k).unwrap();
        assert_eq!(records[0].language, Language::Zh);
        assert_eq!(records[0].gold_answers, vec![("x".to_string(), int(17))]);
    }

    #[test]
    fn hmwp_adapter_splits_multi_equations() {
        let raw = r#"{"id": "h1", "original_text": "两个数之和是12，之差是4，求两数。", "equation": "x + y = 12 ; x - y = 4", "ans": [8, 4]}"#;
        let file = write_fixture(raw);
        let records = load_dataset(file.path(), Adapter::Hmwp).unwrap();
        assert_eq!(records[0].gold_equations.len(), 2);
        assert!(records[0].is_multi_equation());
    }

    #[test]
    fn svamp_adapter_tags_challenge_subset() {
        let raw = r#"[{"ID": "chal-1", "Body": "Paco had 26 cookies.", "Question": "He ate 9. How many are left?", "Equation": "( 26 - 9 )", "Answer": 17.0}]"#;
        let file = write_fixture(raw);
        let records = load_dataset(file.path(), Adapter::Svamp).unwrap();
        assert_eq!(records[0].subset_tag.as_deref(), Some("challenge"));
        assert_eq!(records[0].gold_equations, vec!["x = ( 26 - 9 )"]);
        let stats = compute_stats(&records);
        assert_eq!(stats.num_hard_subset, 1);
    }
}
