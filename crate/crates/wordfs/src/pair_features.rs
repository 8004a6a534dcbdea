//! Supervised pair-feature extraction.
//!
//! For a word pair (a, b) the feature of dimension i is the normalized
//! element-wise product a_i * b_i / (|a||b|). Summed over dimensions these
//! features reproduce the pair's cosine similarity exactly, so each
//! dimension's feature measures that dimension's linear contribution to
//! the similarity score.

use ndarray::Array2;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::simdata::WordPairDataset;

/// Per-pair, per-dimension features with their supervision labels.
#[derive(Debug, Clone)]
pub struct PairFeatureMatrix {
    /// m x d feature matrix, one row per kept pair.
    pub features: Array2<f64>,
    /// Human similarity score per kept pair.
    pub labels: Vec<f64>,
    /// Indices into the source dataset, one per kept row.
    pub kept_pairs: Vec<usize>,
    /// Pairs dropped because a word was out of vocabulary.
    pub skipped_oov: usize,
    /// Pairs dropped because an embedding had zero norm.
    pub skipped_zero: usize,
}

impl PairFeatureMatrix {
    pub fn n_pairs(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

/// Build the feature matrix for every resolvable pair in `ds`.
///
/// Pairs with an unresolvable word (after optional case folding) or a
/// zero-norm vector are skipped and counted. Errors when nothing is left
/// to supervise on.
pub fn extract_features(
    table: &EmbeddingTable,
    ds: &WordPairDataset,
    fold_case: bool,
) -> Result<PairFeatureMatrix> {
    let d = table.dim();
    let mut rows: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut kept_pairs = Vec::new();
    let mut skipped_oov = 0usize;
    let mut skipped_zero = 0usize;

    for (idx, pair) in ds.pairs.iter().enumerate() {
        let (a, b) = match (
            table.lookup(&pair.word1, fold_case),
            table.lookup(&pair.word2, fold_case),
        ) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                skipped_oov += 1;
                continue;
            }
        };
        let na = norm(a);
        let nb = norm(b);
        if na == 0.0 || nb == 0.0 {
            skipped_zero += 1;
            continue;
        }
        let denom = na * nb;
        rows.reserve(d);
        for i in 0..d {
            rows.push(a[i] * b[i] / denom);
        }
        labels.push(pair.score);
        kept_pairs.push(idx);
    }

    if labels.is_empty() {
        return Err(Error::domain(format!(
            "{}: no resolvable word pairs to supervise on \
             ({skipped_oov} out of vocabulary, {skipped_zero} zero-norm)",
            ds.name
        )));
    }

    let features = Array2::from_shape_vec((labels.len(), d), rows)
        .expect("feature rows have uniform width");
    Ok(PairFeatureMatrix {
        features,
        labels,
        kept_pairs,
        skipped_oov,
        skipped_zero,
    })
}
