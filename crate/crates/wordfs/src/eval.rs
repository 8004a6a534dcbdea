//! Word-similarity evaluation and the cross-validated experiment runner.
//!
//! Scores follow the usual protocol: cosine similarity per resolvable
//! pair, Spearman correlation against the human scores, reported on a
//! x100 scale. Cross-validation re-fits the supervised selection per
//! training fold; post-processing, being label-free, is fit once on the
//! full vocabulary.

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::linalg::{cosine_similarity, norm, spearman_corr};
use crate::pair_features::extract_features;
use crate::pipeline::{reduce, ReductionSpec};
use crate::postprocess::ppa;
use crate::simdata::{kfold_split, WordPairDataset};

/// Evaluation outcome for one dataset (optionally cross-validated).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset_name: String,
    /// Spearman correlation x100.
    pub spearman: f64,
    /// Pairs that entered the correlation.
    pub kept_pairs: usize,
    /// Pairs skipped because a word was out of vocabulary.
    pub skipped_oov: usize,
    /// Pairs skipped because an embedding had zero norm.
    pub skipped_zero: usize,
    /// Raised when the rank correlation was degenerate (constant input).
    pub degenerate: bool,
    /// Fold scores, trial-major, when cross-validated.
    pub per_fold: Option<Vec<f64>>,
    /// Per-trial means, when cross-validated.
    pub per_trial: Option<Vec<f64>>,
}

/// Score a table against human similarity judgments: cosine per pair,
/// then Spearman correlation of predictions vs scores, x100.
pub fn eval_similarity(
    table: &EmbeddingTable,
    ds: &WordPairDataset,
    fold_case: bool,
) -> Result<EvalReport> {
    let mut predictions = Vec::new();
    let mut labels = Vec::new();
    let mut skipped_oov = 0usize;
    let mut skipped_zero = 0usize;

    for pair in &ds.pairs {
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
        if norm(a) == 0.0 || norm(b) == 0.0 {
            skipped_zero += 1;
            continue;
        }
        predictions.push(cosine_similarity(a, b)?);
        labels.push(pair.score);
    }

    if predictions.len() < 2 {
        return Err(Error::domain(format!(
            "{}: only {} resolvable pairs, need at least 2",
            ds.name,
            predictions.len()
        )));
    }

    let corr = spearman_corr(&predictions, &labels)?;
    Ok(EvalReport {
        dataset_name: ds.name.clone(),
        spearman: 100.0 * corr.rho,
        kept_pairs: predictions.len(),
        skipped_oov,
        skipped_zero,
        degenerate: corr.degenerate,
        per_fold: None,
        per_trial: None,
    })
}

/// Mean of the resolvable tokens' vectors; absent when none resolve.
pub fn mean_pool(
    table: &EmbeddingTable,
    tokens: &[impl AsRef<str>],
    fold_case: bool,
) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; table.dim()];
    let mut count = 0usize;
    for token in tokens {
        if let Some(v) = table.lookup(token.as_ref(), fold_case) {
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    for a in &mut acc {
        *a /= count as f64;
    }
    Some(acc)
}

fn subset_dataset(ds: &WordPairDataset, indices: &[usize]) -> WordPairDataset {
    WordPairDataset::new(
        ds.name.clone(),
        indices.iter().map(|&i| ds.pairs[i].clone()).collect(),
    )
}

/// Run the k-fold cross-validated experiment: for every trial seed the
/// resolvable pairs are re-split into `k` folds; each fold is scored on a
/// reduction fitted from the remaining pairs; the report averages fold
/// scores per trial and trial means overall.
///
/// Identical inputs reproduce the report bit for bit.
pub fn cross_validate(
    table: &EmbeddingTable,
    ds: &WordPairDataset,
    spec: &ReductionSpec,
    k: usize,
    trial_seeds: &[u64],
) -> Result<EvalReport> {
    if trial_seeds.is_empty() {
        return Err(Error::domain("cross_validate: no trial seeds given"));
    }
    if k < 2 {
        return Err(Error::domain(format!(
            "cross_validate: k={k} must be >= 2"
        )));
    }

    // For supervised methods the working table is fit per fold; the
    // label-free post-processing happens once, on the full vocabulary.
    // The unsupervised baselines use no labels at all, so their reduction
    // is fold-independent and computed once.
    let supervised = spec.method.is_supervised();
    let working: EmbeddingTable = if supervised {
        if spec.use_ppa {
            ppa(table, &spec.ppa)?
        } else {
            table.clone()
        }
    } else {
        reduce(table, None, spec)?.table
    };

    // Resolvable = both words found in the vocabulary (which every
    // reduction preserves). Zero-norm vectors are counted but stay in
    // their folds; extraction and scoring skip them individually.
    let mut usable_idx = Vec::new();
    let mut usable_rows = Vec::new();
    let mut skipped_oov = 0usize;
    let mut skipped_zero = 0usize;
    {
        let mut row_of = std::collections::HashMap::new();
        for (i, pair) in ds.pairs.iter().enumerate() {
            match (
                working.resolve(&pair.word1, spec.fold_case),
                working.resolve(&pair.word2, spec.fold_case),
            ) {
                (Some(r1), Some(r2)) => {
                    if norm(working.row(r1)) == 0.0 || norm(working.row(r2)) == 0.0 {
                        skipped_zero += 1;
                    }
                    usable_idx.push(i);
                    for r in [r1, r2] {
                        row_of.entry(r).or_insert_with(|| {
                            usable_rows.push(r);
                            usable_rows.len() - 1
                        });
                    }
                }
                _ => skipped_oov += 1,
            }
        }
    }

    let usable = subset_dataset(ds, &usable_idx);
    if usable.len() < 2 * k {
        return Err(Error::domain(format!(
            "{}: {} resolvable pairs cannot fill {k} folds of at least 2; \
             use a smaller k",
            ds.name,
            usable.len()
        )));
    }

    // All remaining work happens on the subset of rows the pairs touch;
    // lookups and cosines are unchanged, only untouched rows are dropped.
    let mini = working.subset_rows(&usable_rows);

    let mut per_fold = Vec::with_capacity(trial_seeds.len() * k);
    let mut per_trial = Vec::with_capacity(trial_seeds.len());
    for &seed in trial_seeds {
        let split = kfold_split(&usable, k, seed)?;
        let mut fold_scores = Vec::with_capacity(k);
        for f in 0..k {
            let test = subset_dataset(&usable, &split.fold_indices(f));
            let fold_table = if supervised {
                let train = subset_dataset(&usable, &split.train_indices(f));
                let features = extract_features(&mini, &train, spec.fold_case)?;
                let model =
                    crate::feature_select::rank_dimensions(&features, spec.criterion(), &spec.rft)?;
                let dims = model.top_k(spec.target_dim)?.to_vec();
                mini.select_columns(&dims)?
            } else {
                mini.clone()
            };
            let report = eval_similarity(&fold_table, &test, spec.fold_case)?;
            fold_scores.push(report.spearman);
        }
        let trial_mean = fold_scores.iter().sum::<f64>() / k as f64;
        per_fold.extend_from_slice(&fold_scores);
        per_trial.push(trial_mean);
    }

    let spearman = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
    Ok(EvalReport {
        dataset_name: ds.name.clone(),
        spearman,
        kept_pairs: usable.len(),
        skipped_oov,
        skipped_zero,
        degenerate: false,
        per_fold: Some(per_fold),
        per_trial: Some(per_trial),
    })
}
