//! Deterministic split management.
//!
//! Shuffling uses SplitMix64 (Steele, Lea & Flood's published generator)
//! driving a reverse Fisher-Yates pass with modulo reduction. Both are
//! pinned here, in full, so any reimplementation in any language can
//! reproduce the exact same fold assignments from the same seed.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("{n} records cannot fill {k} folds")]
    TooFewRecords { n: usize, k: usize },
    #[error("train/test ratio {0} leaves an empty partition")]
    DegenerateRatio(f64),
    #[error("no record carries subset tag '{0}'")]
    EmptySubset(String),
    #[error("every record carries subset tag '{0}'; the train side is empty")]
    SubsetCoversAll(String),
    #[error("named_subset mode needs one tag per record ({expected} records, {found} tags)")]
    TagsMismatch { expected: usize, found: usize },
}

/// SplitMix64: `z = (state += 0x9E3779B97F4A7C15)`, then two xor-shift
/// multiplies. Public-domain constants, period 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Seeded pseudorandom permutation of `0..n`: reverse Fisher-Yates with
/// `j = next_u64() % (i + 1)`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        indices.swap(i, j);
    }
    indices
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    TrainTest { train_ratio: f64 },
    KFold { k: usize },
    NamedSubset { tag: String },
}

/// Which partition each record index landed in.
///
/// For k-fold, labels are fold indices `0..k`; for the other modes,
/// label 0 is train and label 1 is test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub mode: SplitMode,
    pub assignment: Vec<usize>,
}

impl SplitPlan {
    /// Evaluation rounds this plan provides: k for k-fold, one otherwise.
    pub fn num_folds(&self) -> usize {
        match &self.mode {
            SplitMode::KFold { k } => *k,
            _ => 1,
        }
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        let test_label = match &self.mode {
            SplitMode::KFold { .. } => fold,
            _ => 1,
        };
        self.label_indices(test_label)
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        match &self.mode {
            SplitMode::KFold { .. } => self
                .assignment
                .iter()
                .enumerate()
                .filter(|(_, &label)| label != fold)
                .map(|(i, _)| i)
                .collect(),
            _ => self.label_indices(0),
        }
    }

    fn label_indices(&self, label: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Build a split plan for `n` records.
///
/// K-fold slices a seeded permutation into folds whose sizes differ by at
/// most one; train/test slices it at the ratio; named-subset selection is
/// by tag, with no shuffling, and needs `tags` to carry one entry per
/// record. Identical `(n, mode, seed)` always produce identical plans.
pub fn make_splits(
    n: usize,
    mode: &SplitMode,
    seed: u64,
    tags: &[Option<String>],
) -> Result<SplitPlan, SplitError> {
    let assignment = match mode {
        SplitMode::KFold { k } => {
            if n < *k || *k == 0 {
                return Err(SplitError::TooFewRecords { n, k: *k });
            }
            let permutation = shuffled_indices(n, seed);
            let mut assignment = vec![0usize; n];
            let base = n / k;
            let extra = n % k;
            let mut cursor = 0;
            for fold in 0..*k {
                let size = base + usize::from(fold < extra);
                for &record in &permutation[cursor..cursor + size] {
                    assignment[record] = fold;
                }
                cursor += size;
            }
            assignment
        }
        SplitMode::TrainTest { train_ratio } => {
            let train_count = (n as f64 * train_ratio).floor() as usize;
            if train_count == 0 || train_count >= n {
                return Err(SplitError::DegenerateRatio(*train_ratio));
            }
            let permutation = shuffled_indices(n, seed);
            let mut assignment = vec![1usize; n];
            for &record in &permutation[..train_count] {
                assignment[record] = 0;
            }
            assignment
        }
        SplitMode::NamedSubset { tag } => {
            if tags.len() != n {
                return Err(SplitError::TagsMismatch {
                    expected: n,
                    found: tags.len(),
                });
            }
            let assignment: Vec<usize> = tags
                .iter()
                .map(|t| usize::from(t.as_deref() == Some(tag.as_str())))
                .collect();
            let test = assignment.iter().filter(|&&l| l == 1).count();
            if test == 0 {
                return Err(SplitError::EmptySubset(tag.clone()));
            }
            if test == n {
                return Err(SplitError::SubsetCoversAll(tag.clone()));
            }
            assignment
        }
    };
    Ok(SplitPlan {
        seed,
        mode: mode.clone(),
        assignment,
    })
}
