//! Benchmarking harness and equation engine for math word problem (MWP)
//! solving: dataset ingestion, number mapping and equation templating,
//! exact equation solving, accuracy scoring, and reproducible experiment
//! execution with k-fold splits and hyper-parameter search.

pub mod dataio;
pub mod engine;
pub mod evaluation;
pub mod preprocess;
pub mod rational;
pub mod runner;
