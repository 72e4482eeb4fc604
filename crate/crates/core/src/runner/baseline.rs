//! Non-neural retrieval baseline: predict the equation template of the most
//! similar training problem, by cosine similarity over masked-token counts.

use crate::engine::slot_index;
use crate::evaluation::Prediction;
use crate::preprocess::ProcessedProblem;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    Similarity,
}

impl Weighting {
    pub fn parse(name: &str) -> Option<Weighting> {
        match name {
            "uniform" => Some(Weighting::Uniform),
            "similarity" => Some(Weighting::Similarity),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Similarity => "similarity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub k_neighbors: usize,
    pub weighting: Weighting,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            k_neighbors: 1,
            weighting: Weighting::Uniform,
        }
    }
}

type CountVector = BTreeMap<String, u32>;

struct TrainEntry {
    counts: CountVector,
    norm: f64,
    target: Vec<String>,
}

/// Trained baseline: the stored token-count vectors and target templates of
/// the training records, in training order.
pub struct BaselineModel {
    entries: Vec<TrainEntry>,
    params: BaselineParams,
}

fn count_vector(tokens: &[String]) -> CountVector {
    let mut counts = CountVector::new();
    for token in tokens {
        *counts.entry(token.clone()).or_insert(0) += 1;
    }
    counts
}

fn norm(counts: &CountVector) -> f64 {
    counts
        .values()
        .map(|&c| (c as f64) * (c as f64))
        .sum::<f64>()
        .sqrt()
}

fn cosine(a: &CountVector, a_norm: f64, b: &CountVector, b_norm: f64) -> f64 {
    if a_norm == 0.0 || b_norm == 0.0 {
        return 0.0;
    }
    // iterate the smaller vector
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(token, &c)| large.get(token).map(|&d| (c as f64) * (d as f64)))
        .sum();
    dot / (a_norm * b_norm)
}

/// Store the training records' masked-token count vectors and templates.
pub fn train(problems: &[&ProcessedProblem], params: BaselineParams) -> BaselineModel {
    let entries = problems
        .iter()
        .map(|p| {
            let counts = count_vector(&p.masked_tokens);
            let norm = norm(&counts);
            TrainEntry {
                counts,
                norm,
                target: p.target_tokens.clone(),
            }
        })
        .collect();
    BaselineModel { entries, params }
}

impl BaselineModel {
    /// Predict a target template for one test record.
    ///
    /// The k nearest training records vote for their templates (uniformly
    /// or weighted by similarity); similarity and vote ties both resolve to
    /// the lowest training-record index. Slot tokens beyond the test
    /// record's slot table are clipped to its last slot.
    pub fn predict(&self, test: &ProcessedProblem) -> Prediction {
        assert!(!self.entries.is_empty(), "baseline trained on an empty set");
        let counts = count_vector(&test.masked_tokens);
        let query_norm = norm(&counts);
        let sims: Vec<f64> = self
            .entries
            .iter()
            .map(|e| cosine(&counts, query_norm, &e.counts, e.norm))
            .collect();

        let template = if self.params.k_neighbors <= 1 {
            let mut best = 0usize;
            for (i, &sim) in sims.iter().enumerate().skip(1) {
                if sim > sims[best] {
                    best = i;
                }
            }
            &self.entries[best].target
        } else {
            // stable order: similarity descending, then training index
            let mut order: Vec<usize> = (0..self.entries.len()).collect();
            order.sort_by(|&a, &b| {
                sims[b].partial_cmp(&sims[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
            });
            order.truncate(self.params.k_neighbors);
            // vote per distinct template: (weight, earliest index)
            let mut votes: BTreeMap<&[String], (f64, usize)> = BTreeMap::new();
            for &index in &order {
                let weight = match self.params.weighting {
                    Weighting::Uniform => 1.0,
                    Weighting::Similarity => sims[index],
                };
                let entry = votes
                    .entry(self.entries[index].target.as_slice())
                    .or_insert((0.0, index));
                entry.0 += weight;
                entry.1 = entry.1.min(index);
            }
            let mut winner: Option<(&[String], (f64, usize))> = None;
            for (template, (weight, earliest)) in votes {
                let better = match winner {
                    None => true,
                    Some((_, (best_weight, best_earliest))) => {
                        weight > best_weight || (weight == best_weight && earliest < best_earliest)
                    }
                };
                if better {
                    winner = Some((template, (weight, earliest)));
                }
            }
            let (template, _) = winner.expect("at least one neighbor");
            let index = self
                .entries
                .iter()
                .position(|e| e.target.as_slice() == template)
                .expect("template came from an entry");
            &self.entries[index].target
        };

        Prediction {
            record_id: test.record_id.clone(),
            predicted_target: clip_slots(template, test.slots.len()),
        }
    }
}

/// Map out-of-range `NUM_k` tokens to the test record's last slot. With no
/// slots at all there is nothing to clip to; the token stays as-is and the
/// prediction will score as invalid.
fn clip_slots(template: &[String], slot_count: usize) -> Vec<String> {
    template
        .iter()
        .map(|token| match slot_index(token) {
            Some(k) if slot_count > 0 && k >= slot_count => format!("NUM_{}", slot_count - 1),
            _ => token.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{Language, ProblemRecord};
    use crate::preprocess::preprocess_record;
    use crate::rational::int;

    fn record(id: &str, text: &str, equation: &str, answer: i64) -> ProblemRecord {
        ProblemRecord {
            id: id.to_string(),
            text: text.to_string(),
            language: Language::En,
            gold_equations: vec![equation.to_string()],
            gold_answers: vec![("x".to_string(), int(answer))],
            subset_tag: None,
            source_dataset: "test".to_string(),
        }
    }

    #[test]
    fn single_training_record_always_wins() {
        let train_rec = preprocess_record(&record("t0", "there are 3 apples and 4 pears", "x = 3 + 4", 7)).unwrap();
        let model = train(&[&train_rec], BaselineParams::default());
        let query = preprocess_record(&record("q", "he ran 5 miles", "x = 5", 5)).unwrap();
        let prediction = model.predict(&query);
        assert_eq!(prediction.record_id, "q");
        assert_eq!(prediction.predicted_target, vec!["x", "=", "NUM_0", "+", "NUM_0"]);
    }

    #[test]
    fn duplicate_problem_is_retrieved_exactly() {
        let a = preprocess_record(&record("a", "sam had 10 dogs and lost 4", "x = 10 - 4", 6)).unwrap();
        let b = preprocess_record(&record("b", "a pot holds 3 liters of 2 soups", "x = 3 * 2", 6)).unwrap();
        let model = train(&[&a, &b], BaselineParams::default());
        let twin = preprocess_record(&record("c", "sam had 10 dogs and lost 4", "x = 10 - 4", 6)).unwrap();
        let prediction = model.predict(&twin);
        assert_eq!(prediction.predicted_target, twin.target_tokens);
    }

    #[test]
    fn zero_overlap_ties_break_to_lowest_index() {
        let a = preprocess_record(&record("a", "alpha beta 1", "x = 1", 1)).unwrap();
        let b = preprocess_record(&record("b", "gamma delta 2", "x = 2", 2)).unwrap();
        let model = train(&[&a, &b], BaselineParams::default());
        let query = preprocess_record(&record("q", "epsilon zeta", "x = 0", 0)).unwrap();
        let prediction = model.predict(&query);
        // no token overlap with either; the first training record wins
        assert_eq!(prediction.predicted_target, vec!["x", "=", "NUM_0"]);
    }

    #[test]
    fn out_of_range_slots_clip_to_last() {
        let train_rec =
            preprocess_record(&record("t", "numbers 2 and 3 and 4", "x = 2 + 3 + 4", 9)).unwrap();
        let model = train(&[&train_rec], BaselineParams::default());
        let query = preprocess_record(&record("q", "numbers 2 and 3", "x = 2 + 3", 5)).unwrap();
        let prediction = model.predict(&query);
        assert_eq!(
            prediction.predicted_target,
            vec!["x", "=", "NUM_0", "+", "NUM_1", "+", "NUM_1"]
        );
    }
}
