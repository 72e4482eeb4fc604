//! Command-line front end: thin adapters around the library operations.
//!
//! Exit codes: 0 success, 1 user error (bad input or flags), 2 internal
//! failure.

use clap::{Parser, Subcommand, ValueEnum};
use mwpbench_core::dataio::{self, Adapter, LoadOptions};
use mwpbench_core::engine::{self, SolveResult};
use mwpbench_core::evaluation::{self, GoldExample};
use mwpbench_core::preprocess;
use mwpbench_core::rational::parse_rational;
use mwpbench_core::runner::{self, SplitMode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mwpbench", version, about = "Math word problem benchmarking harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw dataset file to the unified format
    Ingest {
        /// Raw dataset file
        #[arg(long)]
        input: PathBuf,
        /// Input format: unified, mawps, draw1k, math23k, hmwp, svamp, asdiv
        #[arg(long, default_value = "unified")]
        adapter: String,
        /// Unified output file
        #[arg(long)]
        out: PathBuf,
        /// Drop invalid records (reporting how many) instead of aborting
        #[arg(long)]
        skip_invalid: bool,
        /// Stamp every ingested record with this subset tag
        #[arg(long)]
        subset: Option<String>,
    },
    /// Report dataset statistics
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "unified")]
        adapter: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Preprocess a unified dataset into masked tokens and templates
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        /// Processed output file (one JSON record per line)
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one equation system given in canonical syntax
    Solve {
        /// e.g. "7.5 * x + 6.5 * y = 82 <bridge> x + y = 12"
        system: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Score a prediction file against a unified dataset
    Score {
        #[arg(long)]
        dataset: PathBuf,
        /// Predictions, one "id<TAB>target tokens" line per record
        #[arg(long)]
        predictions: PathBuf,
        /// Write the full JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the CSV summary here
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Answer comparison threshold (default 1e-5)
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// Build and print a deterministic split plan
    Split {
        /// Number of records (alternative to --dataset)
        #[arg(long)]
        n: Option<usize>,
        /// Unified dataset to split
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// k_fold, train_test, or named_subset
        #[arg(long, default_value = "k_fold")]
        mode: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        /// Subset tag for named_subset mode
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the configured experiment (splits, baseline, scoring)
    Run {
        /// External config file (TOML)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one config key, e.g. --set seed=7
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Hyper-parameter search, then run the best candidate
    Search {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    fn user(err: impl std::fmt::Display) -> Self {
        CliError::User(err.to_string())
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        CliError::Internal(err.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own usage text; the exit-code contract is ours
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest {
            input,
            adapter,
            out,
            skip_invalid,
            subset,
        } => ingest(&input, &adapter, &out, skip_invalid, subset),
        Command::Stats {
            input,
            adapter,
            format,
        } => stats(&input, &adapter, format),
        Command::Preprocess { input, out } => run_preprocess(&input, &out),
        Command::Solve { system, format } => solve(&system, format),
        Command::Score {
            dataset,
            predictions,
            out,
            csv,
            tolerance,
        } => score(&dataset, &predictions, out.as_deref(), csv.as_deref(), tolerance.as_deref()),
        Command::Split {
            n,
            dataset,
            mode,
            k,
            ratio,
            subset,
            seed,
            format,
        } => split(n, dataset.as_deref(), &mode, k, ratio, subset, seed, format),
        Command::Run { config, set } => run(config.as_deref(), &set),
        Command::Search { config, set } => search(config.as_deref(), &set),
    }
}

fn ingest(
    input: &std::path::Path,
    adapter: &str,
    out: &std::path::Path,
    skip_invalid: bool,
    subset: Option<String>,
) -> Result<(), CliError> {
    let adapter = Adapter::parse(adapter).map_err(CliError::user)?;
    let outcome = dataio::load_dataset_opts(input, adapter, LoadOptions { skip_invalid })
        .map_err(CliError::user)?;
    let mut records = outcome.records;
    if let Some(tag) = subset {
        for record in &mut records {
            record.subset_tag = Some(tag.clone());
        }
    }
    dataio::write_unified(&records, out).map_err(CliError::internal)?;
    println!("ingested {} record(s) -> {}", records.len(), out.display());
    if !outcome.skipped.is_empty() {
        println!("dropped {} invalid record(s)", outcome.skipped.len());
    }
    Ok(())
}

fn stats(input: &std::path::Path, adapter: &str, format: Format) -> Result<(), CliError> {
    let adapter = Adapter::parse(adapter).map_err(CliError::user)?;
    let records = dataio::load_dataset(input, adapter).map_err(CliError::user)?;
    let stats = dataio::compute_stats(&records);
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string(&stats).map_err(CliError::internal)?)
        }
        Format::Text => {
            println!("examples:        {}", stats.num_examples);
            println!("multi-equation:  {}", stats.num_multi_equation);
            println!("hard subset:     {}", stats.num_hard_subset);
            match stats.language {
                Some(language) => println!("language:        {language}"),
                None => println!("language:        mixed/none"),
            }
        }
    }
    Ok(())
}

fn run_preprocess(input: &std::path::Path, out: &std::path::Path) -> Result<(), CliError> {
    let records = dataio::load_dataset(input, Adapter::Unified).map_err(CliError::user)?;
    let mut lines = String::new();
    for record in &records {
        let processed = preprocess::preprocess_record(record).map_err(CliError::user)?;
        lines.push_str(&preprocess::to_json_line(&processed));
        lines.push('\n');
    }
    std::fs::write(out, lines).map_err(CliError::internal)?;
    println!("preprocessed {} record(s) -> {}", records.len(), out.display());
    Ok(())
}

fn solve(system: &str, format: Format) -> Result<(), CliError> {
    let mut equations = Vec::new();
    for part in system.split(engine::BRIDGE_TOKEN) {
        let tokens = engine::lex_equation(part).map_err(CliError::user)?;
        equations.push(tokens);
    }
    let joined: Vec<String> = {
        let mut out = Vec::new();
        for (i, eq) in equations.iter().enumerate() {
            if i > 0 {
                out.push(engine::BRIDGE_TOKEN.to_string());
            }
            out.extend(eq.iter().cloned());
        }
        out
    };
    let system = engine::parse_system_tokens(&joined).map_err(CliError::user)?;
    let result = engine::solve(&system);
    match format {
        Format::Text => match &result {
            SolveResult::Solved(assignments) => {
                for assignment in assignments {
                    let parts: Vec<String> =
                        assignment.iter().map(|(name, value)| format!("{name} = {value}")).collect();
                    println!("{}", parts.join(", "));
                }
            }
            failure => println!("{}", failure.failure_reason().expect("non-solved carries a reason")),
        },
        Format::Json => {
            let line = match &result {
                SolveResult::Solved(assignments) => {
                    let rendered: Vec<serde_json::Value> = assignments
                        .iter()
                        .map(|a| {
                            serde_json::Value::Object(
                                a.iter()
                                    .map(|(name, value)| {
                                        (name.clone(), serde_json::Value::String(value.to_string()))
                                    })
                                    .collect(),
                            )
                        })
                        .collect();
                    serde_json::json!({"status": "solved", "assignments": rendered})
                }
                SolveResult::Invalid(reason) => serde_json::json!({"status": "invalid", "reason": reason}),
                SolveResult::Unsolvable(reason) => {
                    serde_json::json!({"status": "unsolvable", "reason": reason})
                }
                SolveResult::Degenerate(reason) => {
                    serde_json::json!({"status": "degenerate", "reason": reason})
                }
            };
            println!("{line}");
        }
    }
    Ok(())
}

fn score(
    dataset: &std::path::Path,
    predictions: &std::path::Path,
    out: Option<&std::path::Path>,
    csv: Option<&std::path::Path>,
    tolerance: Option<&str>,
) -> Result<(), CliError> {
    let tolerance = match tolerance {
        Some(raw) => parse_rational(raw)
            .ok_or_else(|| CliError::User(format!("tolerance '{raw}' is not a number")))?,
        None => evaluation::default_tolerance(),
    };
    let records = dataio::load_dataset(dataset, Adapter::Unified).map_err(CliError::user)?;
    let mut examples = Vec::with_capacity(records.len());
    for record in &records {
        let processed = preprocess::preprocess_record(record).map_err(CliError::user)?;
        examples.push(GoldExample::new(&processed, record.gold_answers.clone()));
    }
    let predictions = evaluation::read_predictions(predictions).map_err(CliError::user)?;
    let report = evaluation::score(&examples, &predictions, &tolerance).map_err(CliError::user)?;
    println!(
        "scored {} record(s): equation accuracy {:.4}, answer accuracy {:.4}",
        report.n_scored, report.equation_accuracy, report.answer_accuracy
    );
    if let Some(path) = out {
        std::fs::write(path, report.to_json()).map_err(CliError::internal)?;
        println!("report -> {}", path.display());
    }
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv_summary()).map_err(CliError::internal)?;
        println!("summary -> {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn split(
    n: Option<usize>,
    dataset: Option<&std::path::Path>,
    mode: &str,
    k: usize,
    ratio: f64,
    subset: Option<String>,
    seed: u64,
    format: Format,
) -> Result<(), CliError> {
    let tags: Vec<Option<String>>;
    let count = match (n, dataset) {
        (Some(count), None) => {
            tags = vec![None; count];
            count
        }
        (None, Some(path)) => {
            let records = dataio::load_dataset(path, Adapter::Unified).map_err(CliError::user)?;
            tags = records.iter().map(|r| r.subset_tag.clone()).collect();
            records.len()
        }
        _ => return Err(CliError::User("pass exactly one of --n or --dataset".to_string())),
    };
    let mode = match mode {
        "k_fold" => SplitMode::KFold { k },
        "train_test" => SplitMode::TrainTest { train_ratio: ratio },
        "named_subset" => SplitMode::NamedSubset {
            tag: subset.ok_or_else(|| CliError::User("named_subset needs --subset".to_string()))?,
        },
        other => return Err(CliError::User(format!("unknown split mode '{other}'"))),
    };
    let plan = runner::make_splits(count, &mode, seed, &tags).map_err(CliError::user)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string(&plan).map_err(CliError::internal)?),
        Format::Text => {
            println!("seed {seed}, {count} record(s), {} fold(s)", plan.num_folds());
            for fold in 0..plan.num_folds() {
                let test = plan.test_indices(fold);
                println!("fold {fold}: {} test record(s)", test.len());
            }
        }
    }
    Ok(())
}

fn parse_overrides(set: &[String]) -> Result<Vec<(String, String)>, CliError> {
    set.iter()
        .map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::User(format!("--set expects KEY=VALUE, got '{pair}'")))
        })
        .collect()
}

fn run(config_path: Option<&std::path::Path>, set: &[String]) -> Result<(), CliError> {
    let overrides = parse_overrides(set)?;
    let config = runner::resolve_config(config_path, &overrides).map_err(CliError::user)?;
    let result = runner::run_experiment(&config).map_err(CliError::user)?;
    print_experiment(&result);
    let run_id = runner::run_id(&config);
    let out_dir = PathBuf::from(config.str("run.output_dir"));
    let run_dir =
        runner::write_experiment(&result, &out_dir, &run_id).map_err(CliError::internal)?;
    println!("outputs -> {}", run_dir.display());
    Ok(())
}

fn print_experiment(result: &runner::ExperimentResult) {
    println!("fold  n      equ_acc  ans_acc  seconds");
    for (i, fold) in result.folds.iter().enumerate() {
        println!(
            "{i:<5} {:<6} {:<8.4} {:<8.4} {:.3}",
            fold.n_scored, fold.equation_accuracy, fold.answer_accuracy, result.fold_seconds[i]
        );
    }
    println!(
        "macro        {:<8.4} {:<8.4}",
        result.macro_equation_accuracy, result.macro_answer_accuracy
    );
    if let (Some(eq), Some(ans)) = (result.pooled_equation_accuracy, result.pooled_answer_accuracy) {
        println!("pooled       {eq:<8.4} {ans:<8.4}");
    }
}

fn search(config_path: Option<&std::path::Path>, set: &[String]) -> Result<(), CliError> {
    let overrides = parse_overrides(set)?;
    let config = runner::resolve_config(config_path, &overrides).map_err(CliError::user)?;
    let outcome = runner::hyperparam_search(&config).map_err(CliError::user)?;
    println!("candidate  k_neighbors  weighting   val_equ_acc  val_ans_acc");
    for (i, candidate) in outcome.candidates.iter().enumerate() {
        let marker = if i == outcome.best_index { "*" } else { " " };
        println!(
            "{marker}{i:<9} {:<12} {:<11} {:<12.4} {:.4}",
            candidate.params.k_neighbors,
            candidate.params.weighting.name(),
            candidate.validation_equation_accuracy,
            candidate.validation_answer_accuracy
        );
    }
    println!(
        "best: k_neighbors={} weighting={}",
        outcome.best_params.k_neighbors,
        outcome.best_params.weighting.name()
    );
    print_experiment(&outcome.result);
    let run_id = runner::run_id(&config);
    let out_dir = PathBuf::from(config.str("run.output_dir"));
    let run_dir = runner::write_experiment(&outcome.result, &out_dir, &run_id)
        .map_err(CliError::internal)?;

    let table: Vec<serde_json::Value> = outcome
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            serde_json::json!({
                "index": i,
                "k_neighbors": c.params.k_neighbors,
                "weighting": c.params.weighting.name(),
                "validation_equation_accuracy": c.validation_equation_accuracy,
                "validation_answer_accuracy": c.validation_answer_accuracy,
                "best": i == outcome.best_index,
            })
        })
        .collect();
    let search_json = serde_json::to_string_pretty(&serde_json::json!({
        "best_index": outcome.best_index,
        "candidates": table,
    }))
    .map_err(CliError::internal)?;
    let search_path = run_dir.join("search.json");
    std::fs::write(&search_path, search_json).map_err(CliError::internal)?;
    println!("outputs -> {}", run_dir.display());
    Ok(())
}
