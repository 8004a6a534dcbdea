//! Weakly-supervised dimensionality reduction for pre-trained word
//! embeddings.
//!
//! Word vectors are treated as plain feature columns. A few thousand
//! human-scored word-similarity pairs supervise a filter feature
//! selection: each dimension's per-pair feature is the normalized
//! element-wise product whose sum over dimensions is the pair's cosine
//! similarity, and dimensions are ranked either by a two-segment
//! regression loss (`wordfs-p`) or by Spearman correlation with the
//! human scores (`wordfs-s`). The best K dimensions are kept, the rest
//! discarded. A common-direction removal transform and PCA projection
//! baselines are included, along with the Spearman evaluation harness
//! and deterministic k-fold experiment runner the method is usually
//! reported with.
//!
//! Everything is deterministic: fixed summation orders, a pinned shuffle
//! for fold splits, and thread-count-independent parallelism.

pub mod embedding;
pub mod error;
pub mod eval;
pub mod feature_select;
pub mod linalg;
pub mod pair_features;
pub mod pipeline;
pub mod postprocess;
pub mod simdata;

pub use embedding::{EmbeddingFormat, EmbeddingTable, LoadOutcome};
pub use error::{Error, Result};
pub use eval::{cross_validate, eval_similarity, mean_pool, EvalReport};
pub use feature_select::{
    rank_dimensions, rft_loss, spearman_score, RftConfig, SelectionCriterion, SelectionModel,
};
pub use linalg::{
    average_ranks, column_mean, cosine_similarity, fit_pca, remove_projections, spearman_corr,
    PcaBasis, RankCorrelation,
};
pub use pair_features::{extract_features, PairFeatureMatrix};
pub use pipeline::{
    reduce, reduce_pca_algo, reduce_pca_plain, reduce_truncate, reduce_wordfs, Method, Provenance,
    ReductionResult, ReductionSpec,
};
pub use postprocess::{ppa, PpaConfig};
pub use simdata::{aggregate, kfold_split, FoldSplit, WordPair, WordPairDataset};

/// Default trial seeds for the cross-validated experiment protocol.
pub const DEFAULT_TRIAL_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Default fold count for cross-validation.
pub const DEFAULT_FOLDS: usize = 5;
