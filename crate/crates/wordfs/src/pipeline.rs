//! End-to-end dimensionality reduction pipelines.
//!
//! The supervised methods (`wordfs-p`, `wordfs-s`) optionally post-process
//! the table, extract pair features from a supervision dataset, rank the
//! dimensions, and keep the best K columns of the (possibly post-processed)
//! table. Selection never mixes coordinates: every output column equals an
//! input column. Output columns are in ranking order, best first, so a
//! prefix of a reduction is itself a valid smaller reduction.
//!
//! The PCA baselines do mix coordinates: `pca-algo` runs post-processing,
//! projects onto the top-K principal components, and post-processes again;
//! `pca-plain` is the bare projection. `truncate` keeps the first K
//! columns and exists as a floor to compare against.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::feature_select::{rank_dimensions, RftConfig, SelectionCriterion, SelectionModel};
use crate::linalg::{dot, fit_pca};
use crate::pair_features::extract_features;
use crate::postprocess::{ppa, PpaConfig};
use crate::simdata::WordPairDataset;

/// Reduction method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Supervised selection by regression loss.
    WordfsP,
    /// Supervised selection by Spearman correlation.
    WordfsS,
    /// Post-process, project onto top-K principal components, post-process.
    PcaAlgo,
    /// Plain top-K principal component projection.
    PcaPlain,
    /// First K columns, unchanged.
    Truncate,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::WordfsP => "wordfs-p",
            Method::WordfsS => "wordfs-s",
            Method::PcaAlgo => "pca-algo",
            Method::PcaPlain => "pca-plain",
            Method::Truncate => "truncate",
        }
    }

    /// Whether the method needs a supervision dataset.
    pub fn is_supervised(&self) -> bool {
        matches!(self, Method::WordfsP | Method::WordfsS)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wordfs-p" => Ok(Method::WordfsP),
            "wordfs-s" => Ok(Method::WordfsS),
            "pca-algo" => Ok(Method::PcaAlgo),
            "pca-plain" => Ok(Method::PcaPlain),
            "truncate" => Ok(Method::Truncate),
            other => Err(format!(
                "unknown method `{other}` (expected wordfs-p, wordfs-s, pca-algo, pca-plain or truncate)"
            )),
        }
    }
}

/// Full configuration of a reduction run.
#[derive(Debug, Clone)]
pub struct ReductionSpec {
    pub method: Method,
    /// Output dimension K.
    pub target_dim: usize,
    /// Apply post-processing before supervised selection. Ignored by the
    /// PCA baselines (`pca-algo` always post-processes, `pca-plain` and
    /// `truncate` never do).
    pub use_ppa: bool,
    pub ppa: PpaConfig,
    pub rft: RftConfig,
    pub fold_case: bool,
    /// Rank by absolute instead of signed Spearman correlation.
    pub abs_spearman: bool,
}

impl ReductionSpec {
    pub fn new(method: Method, target_dim: usize) -> Self {
        ReductionSpec {
            method,
            target_dim,
            use_ppa: true,
            ppa: PpaConfig::default(),
            rft: RftConfig::default(),
            fold_case: true,
            abs_spearman: false,
        }
    }

    pub(crate) fn criterion(&self) -> SelectionCriterion {
        match self.method {
            Method::WordfsP => SelectionCriterion::Rft,
            Method::WordfsS if self.abs_spearman => SelectionCriterion::SpearmanAbs,
            _ => SelectionCriterion::Spearman,
        }
    }
}

/// What a reduction was computed from, for reporting.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub method: Method,
    pub source_dim: usize,
    pub target_dim: usize,
    pub n_words: usize,
    pub use_ppa: bool,
    pub ppa_d: usize,
    pub rft_bins: usize,
    pub fold_case: bool,
    pub abs_spearman: bool,
    pub dataset: Option<String>,
    pub kept_pairs: Option<usize>,
    pub skipped_oov: Option<usize>,
    pub skipped_zero: Option<usize>,
}

impl Provenance {
    /// Key-value lines in a fixed order, for the structured text report.
    pub fn lines(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("method", self.method.name().to_string()),
            ("n_words", self.n_words.to_string()),
            ("source_dim", self.source_dim.to_string()),
            ("target_dim", self.target_dim.to_string()),
            ("ppa", self.use_ppa.to_string()),
            ("ppa_d", self.ppa_d.to_string()),
            ("rft_bins", self.rft_bins.to_string()),
            ("fold_case", self.fold_case.to_string()),
            ("abs_spearman", self.abs_spearman.to_string()),
        ];
        if let Some(ds) = &self.dataset {
            out.push(("dataset", ds.clone()));
        }
        if let Some(v) = self.kept_pairs {
            out.push(("kept_pairs", v.to_string()));
        }
        if let Some(v) = self.skipped_oov {
            out.push(("skipped_oov", v.to_string()));
        }
        if let Some(v) = self.skipped_zero {
            out.push(("skipped_zero", v.to_string()));
        }
        out
    }
}

/// A reduced table plus the selection model (for the supervised methods)
/// and the run's provenance.
#[derive(Debug)]
pub struct ReductionResult {
    pub table: EmbeddingTable,
    pub model: Option<SelectionModel>,
    pub provenance: Provenance,
}

fn base_provenance(table: &EmbeddingTable, spec: &ReductionSpec) -> Provenance {
    Provenance {
        method: spec.method,
        source_dim: table.dim(),
        target_dim: spec.target_dim,
        n_words: table.n_words(),
        use_ppa: spec.use_ppa,
        ppa_d: spec.ppa.top_d,
        rft_bins: spec.rft.bins(),
        fold_case: spec.fold_case,
        abs_spearman: spec.abs_spearman,
        dataset: None,
        kept_pairs: None,
        skipped_oov: None,
        skipped_zero: None,
    }
}

fn check_target_dim(table: &EmbeddingTable, k: usize) -> Result<()> {
    if k < 1 || k > table.dim() {
        return Err(Error::domain(format!(
            "target dimension {k} out of range 1..={}",
            table.dim()
        )));
    }
    Ok(())
}

/// Run the reduction described by `spec`. Supervised methods require
/// `pairs`; the baselines ignore it.
pub fn reduce(
    table: &EmbeddingTable,
    pairs: Option<&WordPairDataset>,
    spec: &ReductionSpec,
) -> Result<ReductionResult> {
    match spec.method {
        Method::WordfsP | Method::WordfsS => {
            let ds = pairs.ok_or_else(|| {
                Error::domain(format!(
                    "method {} requires a supervision dataset",
                    spec.method
                ))
            })?;
            reduce_wordfs(table, ds, spec)
        }
        Method::PcaAlgo => reduce_pca_algo(table, spec),
        Method::PcaPlain => reduce_pca_plain(table, spec),
        Method::Truncate => {
            let mut result = reduce_truncate(table, spec.target_dim)?;
            result.provenance = Provenance {
                dataset: None,
                kept_pairs: None,
                skipped_oov: None,
                skipped_zero: None,
                ..base_provenance(table, spec)
            };
            Ok(result)
        }
    }
}

/// Supervised reduction: optional post-processing, feature extraction,
/// dimension ranking, then column selection in ranking order. The kept
/// coordinates are never post-processed again after selection.
pub fn reduce_wordfs(
    table: &EmbeddingTable,
    ds: &WordPairDataset,
    spec: &ReductionSpec,
) -> Result<ReductionResult> {
    if !spec.method.is_supervised() {
        return Err(Error::domain(format!(
            "reduce_wordfs called with method {}",
            spec.method
        )));
    }
    check_target_dim(table, spec.target_dim)?;

    let working = if spec.use_ppa {
        ppa(table, &spec.ppa)?
    } else {
        table.clone()
    };

    let features = extract_features(&working, ds, spec.fold_case)?;
    let model = rank_dimensions(&features, spec.criterion(), &spec.rft)?;
    let dims = model.top_k(spec.target_dim)?.to_vec();
    let reduced = working.select_columns(&dims)?;

    let provenance = Provenance {
        dataset: Some(ds.name.clone()),
        kept_pairs: Some(features.n_pairs()),
        skipped_oov: Some(features.skipped_oov),
        skipped_zero: Some(features.skipped_zero),
        ..base_provenance(table, spec)
    };
    Ok(ReductionResult {
        table: reduced,
        model: Some(model),
        provenance,
    })
}

/// Project every row onto the top-K principal components of the table,
/// yielding coordinates in the component basis (n x K).
fn project_top_k(table: &EmbeddingTable, k: usize) -> Result<EmbeddingTable> {
    let basis = fit_pca(table.matrix(), k)?;
    let mean = basis.mean.as_slice().expect("contiguous mean");
    let components: Vec<&[f64]> = (0..k)
        .map(|c| basis.components.row(c).to_slice().expect("contiguous"))
        .collect();

    let n = table.n_words();
    let d = table.dim();
    let mut out = Array2::zeros((n, k));
    let data = out.as_slice_mut().expect("standard layout");
    data.par_chunks_mut(k).enumerate().for_each(|(i, dst)| {
        let src = table.row(i);
        let mut centered = vec![0.0; d];
        for j in 0..d {
            centered[j] = src[j] - mean[j];
        }
        for (c, u) in components.iter().enumerate() {
            dst[c] = dot(u, &centered);
        }
    });
    Ok(table.with_matrix(out))
}

/// The post-process / project / post-process baseline. Requires K greater
/// than the post-processing depth D, otherwise the second pass has nothing
/// to work with.
pub fn reduce_pca_algo(table: &EmbeddingTable, spec: &ReductionSpec) -> Result<ReductionResult> {
    check_target_dim(table, spec.target_dim)?;
    let k = spec.target_dim;
    if k <= spec.ppa.top_d {
        return Err(Error::domain(format!(
            "pca-algo: target dimension {k} must exceed ppa_d {} for the second \
             post-processing pass",
            spec.ppa.top_d
        )));
    }
    let t1 = ppa(table, &spec.ppa)?;
    let t2 = project_top_k(&t1, k)?;
    let t3 = ppa(&t2, &spec.ppa)?;
    Ok(ReductionResult {
        table: t3,
        model: None,
        provenance: base_provenance(table, spec),
    })
}

/// Plain PCA projection baseline, no post-processing on either side.
pub fn reduce_pca_plain(table: &EmbeddingTable, spec: &ReductionSpec) -> Result<ReductionResult> {
    check_target_dim(table, spec.target_dim)?;
    let reduced = project_top_k(table, spec.target_dim)?;
    Ok(ReductionResult {
        table: reduced,
        model: None,
        provenance: base_provenance(table, spec),
    })
}

/// Keep the first K coordinates unchanged.
pub fn reduce_truncate(table: &EmbeddingTable, k: usize) -> Result<ReductionResult> {
    check_target_dim(table, k)?;
    let dims: Vec<usize> = (0..k).collect();
    let reduced = table.select_columns(&dims)?;
    let spec = ReductionSpec {
        use_ppa: false,
        ..ReductionSpec::new(Method::Truncate, k)
    };
    Ok(ReductionResult {
        table: reduced,
        model: None,
        provenance: base_provenance(table, &spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simdata::WordPair;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_table(n: usize, d: usize, seed: u64) -> EmbeddingTable {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let matrix = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
        EmbeddingTable::new((0..n).map(|i| format!("w{i}")).collect(), matrix).unwrap()
    }

    fn random_pairs(n_words: usize, n_pairs: usize, seed: u64) -> WordPairDataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pairs = (0..n_pairs)
            .map(|_| WordPair {
                word1: format!("w{}", rng.gen_range(0..n_words)),
                word2: format!("w{}", rng.gen_range(0..n_words)),
                score: rng.gen_range(0.0..1.0),
            })
            .collect();
        WordPairDataset::new("synth", pairs)
    }

    #[test]
    fn full_dim_selection_is_a_column_permutation() {
        let table = random_table(60, 8, 1);
        let ds = random_pairs(60, 40, 2);
        for method in [Method::WordfsP, Method::WordfsS] {
            let spec = ReductionSpec {
                use_ppa: false,
                ..ReductionSpec::new(method, 8)
            };
            let result = reduce_wordfs(&table, &ds, &spec).unwrap();
            let model = result.model.as_ref().unwrap();
            assert_eq!(result.table.dim(), 8);
            let mut sorted = model.ranking.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..8).collect::<Vec<_>>());
            // Each output column is exactly the ranked input column.
            for (out_col, &src_col) in model.ranking.iter().enumerate() {
                for i in 0..table.n_words() {
                    assert_eq!(result.table.row(i)[out_col], table.row(i)[src_col]);
                }
            }
        }
    }

    #[test]
    fn wordfs_is_deterministic() {
        let table = random_table(80, 10, 3);
        let ds = random_pairs(80, 60, 4);
        let spec = ReductionSpec::new(Method::WordfsS, 5);
        let a = reduce_wordfs(&table, &ds, &spec).unwrap();
        let b = reduce_wordfs(&table, &ds, &spec).unwrap();
        assert_eq!(a.table.matrix(), b.table.matrix());
        assert_eq!(a.model.unwrap().ranking, b.model.unwrap().ranking);
    }

    #[test]
    fn wordfs_requires_pairs() {
        let table = random_table(30, 6, 5);
        let spec = ReductionSpec::new(Method::WordfsS, 3);
        assert!(reduce(&table, None, &spec).is_err());
    }

    #[test]
    fn pca_algo_rejects_k_not_above_ppa_d() {
        let table = random_table(50, 10, 6);
        let spec = ReductionSpec::new(Method::PcaAlgo, 5); // default ppa_d = 7
        let err = reduce(&table, None, &spec).unwrap_err().to_string();
        assert!(err.contains("must exceed ppa_d"), "{err}");
    }

    #[test]
    fn pca_projection_preserves_variance_at_full_remaining_rank() {
        // After removing D components plus the mean, the achievable rank is
        // d - D; projecting onto that many components keeps all variance.
        let table = random_table(100, 10, 7);
        let config = PpaConfig { top_d: 2 };
        let t1 = ppa(&table, &config).unwrap();
        let k = 8;
        let t2 = project_top_k(&t1, k).unwrap();

        let total = |m: ndarray::ArrayView2<f64>| -> f64 {
            let mean = crate::linalg::column_mean(m).unwrap();
            let mut acc = 0.0;
            for row in m.rows() {
                for (v, mu) in row.iter().zip(mean.iter()) {
                    acc += (v - mu) * (v - mu);
                }
            }
            acc
        };
        let v1 = total(t1.matrix());
        let v2 = total(t2.matrix());
        assert!((v1 - v2).abs() <= 1e-8 * v1.max(1.0), "{v1} vs {v2}");
    }

    #[test]
    fn pca_methods_mix_coordinates_but_truncate_does_not() {
        let table = random_table(40, 6, 8);
        let spec = ReductionSpec::new(Method::PcaPlain, 3);
        let pca = reduce(&table, None, &spec).unwrap();
        let mut found_match = true;
        'outer: for c in 0..3 {
            for src in 0..6 {
                if (0..table.n_words()).all(|i| pca.table.row(i)[c] == table.row(i)[src]) {
                    continue 'outer;
                }
            }
            found_match = false;
            break;
        }
        assert!(!found_match, "projection should not preserve raw columns");

        let trunc = reduce_truncate(&table, 3).unwrap();
        for i in 0..table.n_words() {
            assert_eq!(trunc.table.row(i), &table.row(i)[..3]);
        }
    }

    #[test]
    fn truncate_bounds() {
        let table = random_table(10, 4, 9);
        let full = reduce_truncate(&table, 4).unwrap();
        assert_eq!(full.table.matrix(), table.matrix());
        let one = reduce_truncate(&table, 1).unwrap();
        assert_eq!(one.table.dim(), 1);
        assert_eq!(one.table.n_words(), 10);
        assert!(reduce_truncate(&table, 5).is_err());
        assert!(reduce_truncate(&table, 0).is_err());
    }

    #[test]
    fn vocabulary_is_preserved_by_all_methods() {
        let table = random_table(30, 12, 10);
        let ds = random_pairs(30, 40, 11);
        for method in [Method::WordfsP, Method::WordfsS, Method::PcaPlain, Method::Truncate] {
            let spec = ReductionSpec {
                use_ppa: false,
                target_dim: 9,
                ..ReductionSpec::new(method, 9)
            };
            let result = reduce(&table, Some(&ds), &spec).unwrap();
            assert_eq!(result.table.tokens(), table.tokens());
            assert_eq!(result.table.n_words(), 30);
        }
        let spec = ReductionSpec {
            ppa: PpaConfig { top_d: 2 },
            ..ReductionSpec::new(Method::PcaAlgo, 9)
        };
        let result = reduce(&table, None, &spec).unwrap();
        assert_eq!(result.table.tokens(), table.tokens());
    }
}
