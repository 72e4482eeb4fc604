//! Scoring: equation accuracy (exact sequence match) and answer accuracy
//! (instantiate, solve, compare values under the strict 1e-5 rule).

use crate::engine::{self, SolveResult, SolvedValue};
use crate::preprocess::ProcessedProblem;
use crate::rational::{ratio, to_f64, Rational};
use num_traits::Signed;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for unknown record id '{0}'")]
    UnknownRecordId(String),
    #[error("duplicate prediction for record id '{0}'")]
    DuplicatePrediction(String),
    #[error("prediction file {path} line {line}: {reason}")]
    MalformedPredictionFile { path: String, line: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The paper's answer-comparison threshold: differences strictly below
/// 1e-5 count as correct.
pub fn default_tolerance() -> Rational {
    ratio(1, 100_000)
}

/// One predicted target sequence for a record.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub record_id: String,
    pub predicted_target: Vec<String>,
}

/// Everything scoring needs to know about one gold record.
#[derive(Debug, Clone)]
pub struct GoldExample {
    pub record_id: String,
    pub gold_target: Vec<String>,
    pub slot_values: Vec<Rational>,
    pub gold_answers: Vec<(String, Rational)>,
}

impl GoldExample {
    pub fn new(processed: &ProcessedProblem, gold_answers: Vec<(String, Rational)>) -> Self {
        GoldExample {
            record_id: processed.record_id.clone(),
            gold_target: processed.target_tokens.clone(),
            slot_values: processed.slots.iter().map(|s| s.value.clone()).collect(),
            gold_answers,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleResult {
    pub record_id: String,
    pub equation_match: bool,
    pub answer_match: bool,
    pub failure_reason: Option<String>,
    /// Gold equations solve to values that disagree with the stated answers.
    pub gold_inconsistent: bool,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    /// One row per dataset record, ordered by record id.
    pub per_example: Vec<ExampleResult>,
    pub equation_accuracy: f64,
    pub answer_accuracy: f64,
    pub fold_id: Option<usize>,
    pub n_scored: usize,
}

/// Exact token-sequence match, bridge tokens and ordering included.
pub fn equation_match(pred: &[String], gold: &[String]) -> bool {
    pred == gold
}

/// Instantiate and solve a predicted target, then compare solved values
/// against the gold answers as multisets.
///
/// Returns `(matched, failure_reason)`. Invalid, unsolvable, and degenerate
/// predictions all score 0 with distinct reasons. The comparison is strict:
/// a difference of exactly the tolerance does not match. Values solved
/// exactly are compared in exact arithmetic; floating point enters only for
/// irrational roots.
pub fn answer_match(
    pred: &[String],
    slot_values: &[Rational],
    gold_answers: &[(String, Rational)],
    tolerance: &Rational,
) -> (bool, Option<String>) {
    let system = match engine::instantiate(pred, slot_values) {
        Ok(system) => system,
        Err(err) => return (false, Some(format!("invalid: {err}"))),
    };
    match engine::solve(&system) {
        SolveResult::Solved(assignments) => {
            let gold_values: Vec<&Rational> = gold_answers.iter().map(|(_, v)| v).collect();
            for assignment in &assignments {
                let solved: Vec<&SolvedValue> = assignment.values().collect();
                if multiset_match(&solved, &gold_values, tolerance) {
                    return (true, None);
                }
            }
            (false, Some("answer mismatch".to_string()))
        }
        failure => (false, failure.failure_reason()),
    }
}

/// Perfect matching between solved and gold values where each pair differs
/// by strictly less than the tolerance.
fn multiset_match(solved: &[&SolvedValue], gold: &[&Rational], tolerance: &Rational) -> bool {
    if solved.len() != gold.len() {
        return false;
    }
    let mut used = vec![false; gold.len()];
    fn assign(
        i: usize,
        solved: &[&SolvedValue],
        gold: &[&Rational],
        used: &mut [bool],
        tolerance: &Rational,
    ) -> bool {
        if i == solved.len() {
            return true;
        }
        for j in 0..gold.len() {
            if used[j] || !value_close(solved[i], gold[j], tolerance) {
                continue;
            }
            used[j] = true;
            if assign(i + 1, solved, gold, used, tolerance) {
                return true;
            }
            used[j] = false;
        }
        false
    }
    assign(0, solved, gold, &mut used, tolerance)
}

fn value_close(solved: &SolvedValue, gold: &Rational, tolerance: &Rational) -> bool {
    match solved {
        SolvedValue::Exact(value) => (value - gold).abs() < *tolerance,
        SolvedValue::Approx(value) => (value - to_f64(gold)).abs() < to_f64(tolerance),
    }
}

/// Score predictions against a gold dataset.
///
/// Every gold record produces one row; records without a prediction count
/// zero on both metrics. Rows are ordered by record id, so the report is
/// independent of prediction order.
pub fn score(
    examples: &[GoldExample],
    predictions: &[Prediction],
    tolerance: &Rational,
) -> Result<EvalReport, EvalError> {
    score_fold(examples, predictions, tolerance, None)
}

pub fn score_fold(
    examples: &[GoldExample],
    predictions: &[Prediction],
    tolerance: &Rational,
    fold_id: Option<usize>,
) -> Result<EvalReport, EvalError> {
    let known: BTreeMap<&str, &GoldExample> =
        examples.iter().map(|e| (e.record_id.as_str(), e)).collect();
    let mut by_id: BTreeMap<&str, &Prediction> = BTreeMap::new();
    for prediction in predictions {
        if !known.contains_key(prediction.record_id.as_str()) {
            return Err(EvalError::UnknownRecordId(prediction.record_id.clone()));
        }
        if by_id.insert(prediction.record_id.as_str(), prediction).is_some() {
            return Err(EvalError::DuplicatePrediction(prediction.record_id.clone()));
        }
    }

    let mut ordered: Vec<&GoldExample> = examples.iter().collect();
    ordered.sort_by(|a, b| a.record_id.cmp(&b.record_id));

    let mut per_example = Vec::with_capacity(ordered.len());
    for example in ordered {
        let gold_inconsistent = gold_is_inconsistent(example, tolerance);
        let row = match by_id.get(example.record_id.as_str()) {
            Some(prediction) => {
                let eq = equation_match(&prediction.predicted_target, &example.gold_target);
                let (ans, reason) = answer_match(
                    &prediction.predicted_target,
                    &example.slot_values,
                    &example.gold_answers,
                    tolerance,
                );
                ExampleResult {
                    record_id: example.record_id.clone(),
                    equation_match: eq,
                    answer_match: ans,
                    failure_reason: reason,
                    gold_inconsistent,
                }
            }
            None => ExampleResult {
                record_id: example.record_id.clone(),
                equation_match: false,
                answer_match: false,
                failure_reason: Some("missing prediction".to_string()),
                gold_inconsistent,
            },
        };
        per_example.push(row);
    }

    let n = per_example.len();
    let mean = |f: fn(&ExampleResult) -> bool| {
        if n == 0 {
            0.0
        } else {
            per_example.iter().filter(|r| f(r)).count() as f64 / n as f64
        }
    };
    Ok(EvalReport {
        equation_accuracy: mean(|r| r.equation_match),
        answer_accuracy: mean(|r| r.answer_match),
        per_example,
        fold_id,
        n_scored: n,
    })
}

/// The gold target solves, but to values off the stated answers.
fn gold_is_inconsistent(example: &GoldExample, tolerance: &Rational) -> bool {
    let system = match engine::instantiate(&example.gold_target, &example.slot_values) {
        Ok(system) => system,
        Err(_) => return false,
    };
    match engine::solve(&system) {
        SolveResult::Solved(assignments) => {
            let gold_values: Vec<&Rational> = example.gold_answers.iter().map(|(_, v)| v).collect();
            !assignments.iter().any(|assignment| {
                let solved: Vec<&SolvedValue> = assignment.values().collect();
                multiset_match(&solved, &gold_values, tolerance)
            })
        }
        _ => false,
    }
}

// --- prediction and report files ---------------------------------------------

/// Parse the `id<TAB>target-token-string` prediction format.
pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    let raw = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, target) = line.split_once('\t').ok_or_else(|| EvalError::MalformedPredictionFile {
            path: path.display().to_string(),
            line: i + 1,
            reason: "expected id<TAB>target".to_string(),
        })?;
        out.push(Prediction {
            record_id: id.to_string(),
            predicted_target: target.split_whitespace().map(str::to_string).collect(),
        });
    }
    Ok(out)
}

pub fn write_predictions(predictions: &[Prediction], path: &Path) -> Result<(), EvalError> {
    let mut out = String::new();
    for p in predictions {
        out.push_str(&p.record_id);
        out.push('\t');
        out.push_str(&p.predicted_target.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Serialize)]
struct ExampleJson<'a> {
    record_id: &'a str,
    equation_match: u8,
    answer_match: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure_reason: Option<&'a str>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    gold_inconsistent: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    fold_id: Option<usize>,
    n_scored: usize,
    equation_accuracy: f64,
    answer_accuracy: f64,
    per_example: Vec<ExampleJson<'a>>,
}

impl EvalReport {
    /// Machine-readable report: per-example rows plus aggregates.
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            fold_id: self.fold_id,
            n_scored: self.n_scored,
            equation_accuracy: self.equation_accuracy,
            answer_accuracy: self.answer_accuracy,
            per_example: self
                .per_example
                .iter()
                .map(|r| ExampleJson {
                    record_id: &r.record_id,
                    equation_match: r.equation_match as u8,
                    answer_match: r.answer_match as u8,
                    failure_reason: r.failure_reason.as_deref(),
                    gold_inconsistent: r.gold_inconsistent,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&json).expect("report serializes")
    }

    /// One-row CSV summary of the aggregates.
    pub fn to_csv_summary(&self) -> String {
        let mut out = String::from("fold_id,n_scored,equation_accuracy,answer_accuracy\n");
        let fold = self.fold_id.map_or_else(|| "-".to_string(), |f| f.to_string());
        let _ = writeln!(
            out,
            "{fold},{},{},{}",
            self.n_scored, self.equation_accuracy, self.answer_accuracy
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn paco_example() -> GoldExample {
        GoldExample {
            record_id: "paco".to_string(),
            gold_target: toks("x = NUM_0 - NUM_3"),
            slot_values: vec![int(26), int(17), int(14), int(9)],
            gold_answers: vec![("x".to_string(), int(17))],
        }
    }

    #[test]
    fn equation_match_is_exact_sequence_equality() {
        let gold = toks("x = NUM_0 - NUM_3");
        assert!(equation_match(&gold, &gold));
        assert!(!equation_match(&toks("x = NUM_3 - NUM_0"), &gold));
    }

    #[test]
    fn parenthesized_variant_misses_equation_but_matches_answer() {
        let example = paco_example();
        let pred = toks("x = ( NUM_0 ) - NUM_3");
        assert!(!equation_match(&pred, &example.gold_target));
        let (ans, reason) = answer_match(
            &pred,
            &example.slot_values,
            &example.gold_answers,
            &default_tolerance(),
        );
        assert!(ans, "both solve to 17: {reason:?}");
    }

    #[test]
    fn paco_prediction_matches_answer() {
        let example = paco_example();
        let (ans, reason) = answer_match(
            &example.gold_target,
            &example.slot_values,
            &example.gold_answers,
            &default_tolerance(),
        );
        assert!(ans);
        assert_eq!(reason, None);
    }

    #[test]
    fn unparseable_prediction_is_invalid() {
        let example = paco_example();
        let (ans, reason) = answer_match(
            &toks("x = + *"),
            &example.slot_values,
            &example.gold_answers,
            &default_tolerance(),
        );
        assert!(!ans);
        assert!(reason.unwrap().starts_with("invalid:"));
    }

    #[test]
    fn failure_reasons_are_distinct_per_class() {
        let example = paco_example();
        let tol = default_tolerance();
        let run = |target: &str| {
            answer_match(&toks(target), &example.slot_values, &example.gold_answers, &tol).1
        };
        let invalid = run("x = + *").unwrap();
        let inconsistent = run("x + 1 = x + 2").unwrap();
        let nonlinear = run("x * y = 1 <bridge> x + y = 2").unwrap();
        let degenerate = run("x + y = 3").unwrap();
        assert!(invalid.starts_with("invalid:"));
        assert!(inconsistent.starts_with("unsolvable:"));
        assert!(nonlinear.starts_with("unsolvable:"));
        assert_ne!(inconsistent, nonlinear);
        assert!(degenerate.starts_with("degenerate:"));
        let reasons = [&invalid, &inconsistent, &nonlinear, &degenerate];
        for i in 0..reasons.len() {
            for j in i + 1..reasons.len() {
                assert_ne!(reasons[i], reasons[j]);
            }
        }
    }

    #[test]
    fn tolerance_boundary_is_strict() {
        let example = paco_example();
        let tol = default_tolerance();
        // |16.999995 - 17| = 5e-6 < 1e-5
        let (ans, _) = answer_match(
            &toks("x = 16.999995"),
            &example.slot_values,
            &example.gold_answers,
            &tol,
        );
        assert!(ans);
        // |16.99999 - 17| = 1e-5 exactly; strict comparison says no
        let (ans, reason) = answer_match(
            &toks("x = 16.99999"),
            &example.slot_values,
            &example.gold_answers,
            &tol,
        );
        assert!(!ans);
        assert_eq!(reason.as_deref(), Some("answer mismatch"));
    }

    #[test]
    fn multiset_comparison_ignores_names_and_order() {
        let example = GoldExample {
            record_id: "jerome".to_string(),
            gold_target: toks("NUM_1 * x + NUM_2 * y = NUM_3 <bridge> x + y = NUM_0"),
            slot_values: vec![int(12), crate::rational::ratio(15, 2), crate::rational::ratio(13, 2), int(82)],
            gold_answers: vec![("x".to_string(), int(4)), ("y".to_string(), int(8))],
        };
        // renamed unknowns, same value multiset
        let pred = toks("NUM_1 * a + NUM_2 * b = NUM_3 <bridge> a + b = NUM_0");
        let (ans, _) = answer_match(&pred, &example.slot_values, &example.gold_answers, &default_tolerance());
        assert!(ans);
    }

    fn synthetic_examples(n: usize) -> Vec<GoldExample> {
        (0..n)
            .map(|i| GoldExample {
                record_id: format!("r{i:03}"),
                gold_target: toks("x = NUM_0 + NUM_1"),
                slot_values: vec![int(i as i64), int(2)],
                gold_answers: vec![("x".to_string(), int(i as i64 + 2))],
            })
            .collect()
    }

    fn gold_predictions(examples: &[GoldExample]) -> Vec<Prediction> {
        examples
            .iter()
            .map(|e| Prediction {
                record_id: e.record_id.clone(),
                predicted_target: e.gold_target.clone(),
            })
            .collect()
    }

    #[test]
    fn self_scoring_yields_perfect_accuracy() {
        let examples = synthetic_examples(50);
        let predictions = gold_predictions(&examples);
        let report = score(&examples, &predictions, &default_tolerance()).unwrap();
        assert_eq!(report.equation_accuracy, 1.0);
        assert_eq!(report.answer_accuracy, 1.0);
        assert_eq!(report.n_scored, 50);
    }

    #[test]
    fn corrupting_ten_of_fifty_gives_point_eight() {
        let examples = synthetic_examples(50);
        let mut predictions = gold_predictions(&examples);
        for p in predictions.iter_mut().take(10) {
            // wrong but solvable: minus instead of plus
            p.predicted_target = toks("x = NUM_0 - NUM_1");
        }
        let report = score(&examples, &predictions, &default_tolerance()).unwrap();
        assert_eq!(report.equation_accuracy, 0.8);
    }

    #[test]
    fn empty_prediction_list_scores_zero_with_missing_rows() {
        let examples = synthetic_examples(50);
        let report = score(&examples, &[], &default_tolerance()).unwrap();
        assert_eq!(report.equation_accuracy, 0.0);
        assert_eq!(report.answer_accuracy, 0.0);
        let missing = report
            .per_example
            .iter()
            .filter(|r| r.failure_reason.as_deref() == Some("missing prediction"))
            .count();
        assert_eq!(missing, 50);
    }

    #[test]
    fn score_rejects_unknown_and_duplicate_ids() {
        let examples = synthetic_examples(3);
        let stray = Prediction {
            record_id: "nope".to_string(),
            predicted_target: toks("x = 1"),
        };
        assert!(matches!(
            score(&examples, &[stray], &default_tolerance()),
            Err(EvalError::UnknownRecordId(_))
        ));
        let mut predictions = gold_predictions(&examples);
        predictions.push(predictions[0].clone());
        assert!(matches!(
            score(&examples, &predictions, &default_tolerance()),
            Err(EvalError::DuplicatePrediction(_))
        ));
    }

    #[test]
    fn score_is_permutation_invariant() {
        let examples = synthetic_examples(20);
        let mut predictions = gold_predictions(&examples);
        for (i, p) in predictions.iter_mut().enumerate() {
            if i % 3 == 0 {
                p.predicted_target = toks("x = NUM_1 + NUM_0");
            }
        }
        let forward = score(&examples, &predictions, &default_tolerance()).unwrap();
        predictions.reverse();
        let reversed = score(&examples, &predictions, &default_tolerance()).unwrap();
        assert_eq!(forward.per_example, reversed.per_example);
        assert_eq!(forward.to_json(), reversed.to_json());
    }

    #[test]
    fn inconsistent_gold_is_marked() {
        let mut examples = synthetic_examples(2);
        examples[1].gold_answers = vec![("x".to_string(), int(999))];
        let predictions = gold_predictions(&examples);
        let report = score(&examples, &predictions, &default_tolerance()).unwrap();
        assert!(!report.per_example[0].gold_inconsistent);
        assert!(report.per_example[1].gold_inconsistent);
        // the prediction still scores: equation matches, answer cannot
        assert!(report.per_example[1].equation_match);
        assert!(!report.per_example[1].answer_match);
    }

    #[test]
    fn prediction_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.tsv");
        let predictions = vec![
            Prediction {
                record_id: "a".to_string(),
                predicted_target: toks("x = NUM_0 - NUM_3"),
            },
            Prediction {
                record_id: "b".to_string(),
                predicted_target: toks("x + y = NUM_0 <bridge> x - y = NUM_1"),
            },
        ];
        write_predictions(&predictions, &path).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), predictions);
    }
}
