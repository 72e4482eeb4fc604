//! Grid and random search over baseline hyper-parameters.
//!
//! Candidates are scored on a validation slice carved out of the training
//! side of the plan's first fold; the fold's test records are never touched
//! until the final run with the winning parameters.

use super::baseline::{self, BaselineParams, Weighting};
use super::config::{Config, ConfigValue, Layer};
use super::experiment::{prepare_experiment, run_prepared, ExperimentResult};
use super::split::{shuffled_indices, SplitMix64};
use super::RunnerError;
use crate::evaluation::{score_fold, GoldExample};
use crate::preprocess::ProcessedProblem;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub params: BaselineParams,
    pub validation_equation_accuracy: f64,
    pub validation_answer_accuracy: f64,
}

#[derive(Debug)]
pub struct SearchOutcome {
    /// Candidate scores in enumeration order.
    pub candidates: Vec<CandidateResult>,
    pub best_index: usize,
    pub best_params: BaselineParams,
    /// The final experiment, run with the winning parameters.
    pub result: ExperimentResult,
    /// Record indices candidates were scored on (the access log).
    pub validation_indices: Vec<usize>,
    /// Record indices of the held-out test partition (fold 0).
    pub held_out_test_indices: Vec<usize>,
}

/// Enumerate the declared search space in a fixed order: grid search walks
/// the cartesian product (`k_neighbors` outer, `weighting` inner); random
/// search draws `search.budget` combinations with SplitMix64 seeded at
/// `seed + 2`.
fn enumerate_candidates(config: &Config) -> Result<Vec<BaselineParams>, RunnerError> {
    let ks: Vec<usize> = config
        .int_list("search.k_neighbors")
        .iter()
        .map(|&k| k as usize)
        .collect();
    let ks = if ks.is_empty() {
        vec![config.int("model.k_neighbors") as usize]
    } else {
        ks
    };
    let weightings: Vec<Weighting> = {
        let declared = config.str_list("search.weighting");
        if declared.is_empty() {
            vec![Weighting::parse(config.str("model.weighting")).expect("validated")]
        } else {
            declared
                .iter()
                .map(|name| {
                    Weighting::parse(name).ok_or_else(|| RunnerError::EmptySearchSpace(format!(
                        "'{name}' is not a weighting"
                    )))
                })
                .collect::<Result<_, _>>()?
        }
    };

    match config.str("search.strategy") {
        "grid" => {
            let mut out = Vec::new();
            for &k_neighbors in &ks {
                for &weighting in &weightings {
                    out.push(BaselineParams { k_neighbors, weighting });
                }
            }
            if out.is_empty() {
                return Err(RunnerError::EmptySearchSpace("the grid is empty".to_string()));
            }
            Ok(out)
        }
        "random" => {
            let budget = config.int("search.budget");
            if budget <= 0 {
                return Err(RunnerError::EmptySearchSpace(
                    "random search needs a positive budget".to_string(),
                ));
            }
            let mut rng = SplitMix64::new(config.seed().wrapping_add(2));
            let out = (0..budget)
                .map(|_| {
                    let k_neighbors = ks[(rng.next_u64() % ks.len() as u64) as usize];
                    let weighting = weightings[(rng.next_u64() % weightings.len() as u64) as usize];
                    BaselineParams { k_neighbors, weighting }
                })
                .collect();
            Ok(out)
        }
        other => unreachable!("strategy '{other}' validated at config resolution"),
    }
}

/// Search the declared space and run the final experiment with the winner.
///
/// The winner is the candidate with the highest validation answer accuracy;
/// ties go to the earliest in enumeration order.
pub fn hyperparam_search(config: &Config) -> Result<SearchOutcome, RunnerError> {
    let candidates = enumerate_candidates(config)?;
    let prepared = prepare_experiment(config)?;

    // pool = training side of fold 0; its test side stays untouched
    let pool = prepared.plan.train_indices(0);
    let held_out = prepared.plan.test_indices(0);

    // carve validation from the pool with a derived seed
    let order = shuffled_indices(pool.len(), config.seed().wrapping_add(1));
    let val_count = ((pool.len() as f64) * config.float("search.validation_ratio")).floor() as usize;
    let val_count = val_count.clamp(1, pool.len().saturating_sub(1).max(1));
    let validation: Vec<usize> = order[..val_count].iter().map(|&i| pool[i]).collect();
    let train: Vec<usize> = order[val_count..].iter().map(|&i| pool[i]).collect();
    if train.is_empty() {
        return Err(RunnerError::EmptySearchSpace(
            "the training pool is too small to carve a validation split".to_string(),
        ));
    }

    let tolerance = config.tolerance();
    let train_problems: Vec<&ProcessedProblem> =
        train.iter().map(|&i| &prepared.problems[i]).collect();
    let val_examples: Vec<GoldExample> =
        validation.iter().map(|&i| prepared.examples[i].clone()).collect();

    let results: Vec<CandidateResult> = candidates
        .par_iter()
        .map(|&params| {
            let model = baseline::train(&train_problems, params);
            let predictions: Vec<_> = validation
                .iter()
                .map(|&i| model.predict(&prepared.problems[i]))
                .collect();
            let report = score_fold(&val_examples, &predictions, &tolerance, None)?;
            Ok(CandidateResult {
                params,
                validation_equation_accuracy: report.equation_accuracy,
                validation_answer_accuracy: report.answer_accuracy,
            })
        })
        .collect::<Result<_, RunnerError>>()?;

    let mut best_index = 0;
    for (i, candidate) in results.iter().enumerate().skip(1) {
        if candidate.validation_answer_accuracy > results[best_index].validation_answer_accuracy {
            best_index = i;
        }
    }
    let best_params = results[best_index].params;

    let mut final_config = config.clone();
    final_config
        .set(
            "model.k_neighbors",
            ConfigValue::Int(best_params.k_neighbors as i64),
            Layer::CommandLine,
        )
        .expect("schema key");
    final_config
        .set(
            "model.weighting",
            ConfigValue::Str(best_params.weighting.name().to_string()),
            Layer::CommandLine,
        )
        .expect("schema key");
    let result = run_prepared(&final_config, &prepared)?;

    let mut validation_indices = validation;
    validation_indices.sort_unstable();
    let mut held_out_test_indices = held_out;
    held_out_test_indices.sort_unstable();
    Ok(SearchOutcome {
        candidates: results,
        best_index,
        best_params,
        result,
        validation_indices,
        held_out_test_indices,
    })
}
