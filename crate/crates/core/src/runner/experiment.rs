//! Experiment orchestration: prepare a dataset, split it, train and score
//! the baseline per fold, and write deterministic result files.

use super::baseline::{self, BaselineParams, Weighting};
use super::config::{Config, SnapshotEntry};
use super::split::{make_splits, SplitMode, SplitPlan};
use super::RunnerError;
use crate::dataio::{self, Adapter, LoadOptions, ProblemRecord};
use crate::evaluation::{score_fold, EvalReport, GoldExample};
use crate::preprocess::{preprocess_record, ProcessedProblem};
use crate::rational::Rational;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable naming the default directory for relative dataset
/// paths that do not resolve against the working directory.
pub const DATA_DIR_ENV: &str = "MWPBENCH_DATA_DIR";

pub fn resolve_data_path(raw: &str) -> PathBuf {
    let path = Path::new(raw);
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(base) => Path::new(&base).join(path),
        None => path.to_path_buf(),
    }
}

/// A dataset loaded, preprocessed, and split according to a config.
pub struct Prepared {
    pub records: Vec<ProblemRecord>,
    pub problems: Vec<ProcessedProblem>,
    pub examples: Vec<GoldExample>,
    pub plan: SplitPlan,
}

pub fn baseline_params(config: &Config) -> Result<BaselineParams, RunnerError> {
    if config.str("model.name") != "retrieval" {
        return Err(RunnerError::UnknownModel(config.str("model.name").to_string()));
    }
    let weighting = Weighting::parse(config.str("model.weighting"))
        .expect("weighting validated at config resolution");
    Ok(BaselineParams {
        k_neighbors: config.int("model.k_neighbors") as usize,
        weighting,
    })
}

pub fn split_mode(config: &Config) -> SplitMode {
    match config.str("split.mode") {
        "k_fold" => SplitMode::KFold {
            k: config.int("split.k") as usize,
        },
        "train_test" => SplitMode::TrainTest {
            train_ratio: config.float("split.train_ratio"),
        },
        "named_subset" => SplitMode::NamedSubset {
            tag: config.str("split.subset_tag").to_string(),
        },
        other => unreachable!("mode '{other}' validated at config resolution"),
    }
}

/// Load, validate, preprocess, and split the configured dataset.
///
/// With `data.test_path` set in train_test mode, the provided files define
/// the split directly; otherwise the seeded plan does.
pub fn prepare_experiment(config: &Config) -> Result<Prepared, RunnerError> {
    if config.str("data.path").is_empty() {
        return Err(RunnerError::MissingDataset);
    }
    let adapter = Adapter::parse(config.str("data.adapter"))?;
    let options = LoadOptions {
        skip_invalid: config.bool("data.skip_invalid"),
    };
    let path = resolve_data_path(config.str("data.path"));
    let outcome = dataio::load_dataset_opts(&path, adapter, options)?;
    if !outcome.skipped.is_empty() {
        log::warn!("dropped {} invalid record(s) during ingestion", outcome.skipped.len());
    }
    let mut records = outcome.records;

    let provided_test = config.str("split.mode") == "train_test" && !config.str("data.test_path").is_empty();
    let plan = if provided_test {
        let test_path = resolve_data_path(config.str("data.test_path"));
        let test_records = dataio::load_dataset_opts(&test_path, adapter, options)?.records;
        let train_count = records.len();
        records.extend(test_records);
        SplitPlan {
            seed: config.seed(),
            mode: SplitMode::TrainTest {
                train_ratio: config.float("split.train_ratio"),
            },
            assignment: (0..records.len()).map(|i| usize::from(i >= train_count)).collect(),
        }
    } else {
        let tags: Vec<Option<String>> = records.iter().map(|r| r.subset_tag.clone()).collect();
        make_splits(records.len(), &split_mode(config), config.seed(), &tags)?
    };

    let problems: Vec<ProcessedProblem> = records
        .iter()
        .map(preprocess_record)
        .collect::<Result<_, _>>()?;
    let examples: Vec<GoldExample> = problems
        .iter()
        .zip(&records)
        .map(|(p, r)| GoldExample::new(p, r.gold_answers.clone()))
        .collect();
    Ok(Prepared {
        records,
        problems,
        examples,
        plan,
    })
}

/// Train on a fold's training records and score its test records.
pub fn run_fold(
    prepared: &Prepared,
    fold: usize,
    params: BaselineParams,
    tolerance: &Rational,
) -> Result<EvalReport, RunnerError> {
    let train_indices = prepared.plan.train_indices(fold);
    let test_indices = prepared.plan.test_indices(fold);
    let train_problems: Vec<&ProcessedProblem> =
        train_indices.iter().map(|&i| &prepared.problems[i]).collect();
    let model = baseline::train(&train_problems, params);
    let predictions: Vec<_> = test_indices
        .iter()
        .map(|&i| model.predict(&prepared.problems[i]))
        .collect();
    let test_examples: Vec<GoldExample> = test_indices
        .iter()
        .map(|&i| prepared.examples[i].clone())
        .collect();
    let report = score_fold(&test_examples, &predictions, tolerance, Some(fold))?;
    Ok(report)
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub plan: SplitPlan,
    pub folds: Vec<EvalReport>,
    /// Wall-clock seconds per fold. Reported on stdout, never written to
    /// result files, so reruns stay byte-identical.
    pub fold_seconds: Vec<f64>,
    pub macro_equation_accuracy: f64,
    pub macro_answer_accuracy: f64,
    pub pooled_equation_accuracy: Option<f64>,
    pub pooled_answer_accuracy: Option<f64>,
    pub config_snapshot: BTreeMap<String, SnapshotEntry>,
}

/// Run the configured experiment: every fold in the plan, trained and
/// scored independently (folds run in parallel; results reduce in fold
/// order), then macro-averaged.
pub fn run_experiment(config: &Config) -> Result<ExperimentResult, RunnerError> {
    let prepared = prepare_experiment(config)?;
    run_prepared(config, &prepared)
}

pub fn run_prepared(config: &Config, prepared: &Prepared) -> Result<ExperimentResult, RunnerError> {
    let params = baseline_params(config)?;
    let tolerance = config.tolerance();
    let num_folds = prepared.plan.num_folds();

    let fold_runs: Vec<(EvalReport, f64)> = (0..num_folds)
        .into_par_iter()
        .map(|fold| {
            let started = Instant::now();
            let report = run_fold(prepared, fold, params, &tolerance)
                .map_err(|source| RunnerError::Fold {
                    fold,
                    source: Box::new(source),
                })?;
            Ok((report, started.elapsed().as_secs_f64()))
        })
        .collect::<Result<_, RunnerError>>()?;

    let (folds, fold_seconds): (Vec<EvalReport>, Vec<f64>) = fold_runs.into_iter().unzip();
    let macro_equation_accuracy =
        folds.iter().map(|f| f.equation_accuracy).sum::<f64>() / folds.len() as f64;
    let macro_answer_accuracy =
        folds.iter().map(|f| f.answer_accuracy).sum::<f64>() / folds.len() as f64;

    let (pooled_equation_accuracy, pooled_answer_accuracy) = if config.bool("run.pooled") {
        let total: usize = folds.iter().map(|f| f.n_scored).sum();
        let eq: usize = folds
            .iter()
            .map(|f| f.per_example.iter().filter(|r| r.equation_match).count())
            .sum();
        let ans: usize = folds
            .iter()
            .map(|f| f.per_example.iter().filter(|r| r.answer_match).count())
            .sum();
        (
            Some(eq as f64 / total as f64),
            Some(ans as f64 / total as f64),
        )
    } else {
        (None, None)
    };

    Ok(ExperimentResult {
        plan: prepared.plan.clone(),
        folds,
        fold_seconds,
        macro_equation_accuracy,
        macro_answer_accuracy,
        pooled_equation_accuracy,
        pooled_answer_accuracy,
        config_snapshot: config.snapshot(),
    })
}

/// Stable identifier for the output directory of a run.
pub fn run_id(config: &Config) -> String {
    let configured = config.str("run.id");
    if !configured.is_empty() {
        return configured.to_string();
    }
    let mode = config.str("split.mode");
    let detail = match mode {
        "k_fold" => format!("k{}", config.int("split.k")),
        "train_test" => format!("r{}", config.float("split.train_ratio")),
        _ => config.str("split.subset_tag").to_string(),
    };
    format!("{}-{mode}-{detail}-seed{}", config.str("model.name"), config.seed())
}

#[derive(Serialize)]
struct FoldSummaryJson {
    fold_id: usize,
    n_scored: usize,
    equation_accuracy: f64,
    answer_accuracy: f64,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    config: &'a BTreeMap<String, SnapshotEntry>,
    folds: Vec<FoldSummaryJson>,
    macro_equation_accuracy: f64,
    macro_answer_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pooled_equation_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pooled_answer_accuracy: Option<f64>,
}

/// Write the run's output tree under `base_dir`:
/// `{run_id}/fold_{i}/report.json` and `report.csv` per fold, plus
/// `{run_id}/splits.json`, `summary.json`, and `summary.csv`.
/// Identical config and seed rewrite identical bytes.
pub fn write_experiment(
    result: &ExperimentResult,
    base_dir: &Path,
    run_id: &str,
) -> Result<PathBuf, RunnerError> {
    let run_dir = base_dir.join(run_id);
    let io_err = |path: &Path, source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    };
    for (fold, report) in result.folds.iter().enumerate() {
        let fold_dir = run_dir.join(format!("fold_{fold}"));
        fs::create_dir_all(&fold_dir).map_err(|e| io_err(&fold_dir, e))?;
        let report_json = fold_dir.join("report.json");
        fs::write(&report_json, report.to_json()).map_err(|e| io_err(&report_json, e))?;
        let report_csv = fold_dir.join("report.csv");
        fs::write(&report_csv, report.to_csv_summary()).map_err(|e| io_err(&report_csv, e))?;
    }

    let splits_path = run_dir.join("splits.json");
    let splits = serde_json::to_string_pretty(&result.plan).expect("plan serializes");
    fs::write(&splits_path, splits).map_err(|e| io_err(&splits_path, e))?;

    let summary = SummaryJson {
        config: &result.config_snapshot,
        folds: result
            .folds
            .iter()
            .enumerate()
            .map(|(fold_id, f)| FoldSummaryJson {
                fold_id,
                n_scored: f.n_scored,
                equation_accuracy: f.equation_accuracy,
                answer_accuracy: f.answer_accuracy,
            })
            .collect(),
        macro_equation_accuracy: result.macro_equation_accuracy,
        macro_answer_accuracy: result.macro_answer_accuracy,
        pooled_equation_accuracy: result.pooled_equation_accuracy,
        pooled_answer_accuracy: result.pooled_answer_accuracy,
    };
    let summary_path = run_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, json).map_err(|e| io_err(&summary_path, e))?;

    let mut csv = String::from("fold_id,n_scored,equation_accuracy,answer_accuracy\n");
    for (fold_id, fold) in result.folds.iter().enumerate() {
        csv.push_str(&format!(
            "{fold_id},{},{},{}\n",
            fold.n_scored, fold.equation_accuracy, fold.answer_accuracy
        ));
    }
    csv.push_str(&format!(
        "macro,{},{},{}\n",
        result.folds.iter().map(|f| f.n_scored).sum::<usize>(),
        result.macro_equation_accuracy,
        result.macro_answer_accuracy
    ));
    let csv_path = run_dir.join("summary.csv");
    fs::write(&csv_path, csv).map_err(|e| io_err(&csv_path, e))?;
    Ok(run_dir)
}
