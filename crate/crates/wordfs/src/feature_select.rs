//! Per-dimension relevance scoring and best-first dimension ranking.
//!
//! Two filter criteria are provided. The regression-loss criterion scores
//! a dimension by the best achievable weighted two-segment MSE of the
//! labels after a single threshold split of the feature range (lower is
//! better). The rank-correlation criterion scores a dimension by the
//! Spearman correlation between the feature and the labels (higher is
//! better). Both are model-free and depend only on (feature, label)
//! columns, so rankings are cheap and reproducible.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::spearman_corr;
use crate::pair_features::PairFeatureMatrix;

/// Binning configuration for the regression-loss scorer: the feature range
/// is split into `2^bin_exponent` uniform segments and every interior
/// boundary is tried as a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RftConfig {
    pub bin_exponent: u32,
}

impl Default for RftConfig {
    fn default() -> Self {
        // 2^2 = 4 segments.
        RftConfig { bin_exponent: 2 }
    }
}

impl RftConfig {
    pub fn new(bin_exponent: u32) -> Result<Self> {
        if bin_exponent < 1 {
            return Err(Error::domain("rft bin exponent must be at least 1"));
        }
        Ok(RftConfig { bin_exponent })
    }

    /// Construct from a segment count, which must be a power of two >= 2.
    pub fn from_bins(bins: usize) -> Result<Self> {
        if bins < 2 || !bins.is_power_of_two() {
            return Err(Error::domain(format!(
                "rft bins must be a power of two >= 2, got {bins}"
            )));
        }
        Ok(RftConfig {
            bin_exponent: bins.trailing_zeros(),
        })
    }

    pub fn bins(&self) -> usize {
        1usize << self.bin_exponent
    }
}

/// Ranking direction of a `SelectionModel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionCriterion {
    /// Two-segment regression loss, ascending (small loss first).
    Rft,
    /// Signed Spearman correlation, descending.
    Spearman,
    /// Absolute Spearman correlation, descending.
    SpearmanAbs,
}

impl SelectionCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionCriterion::Rft => "rft",
            SelectionCriterion::Spearman => "spearman",
            SelectionCriterion::SpearmanAbs => "spearman-abs",
        }
    }
}

/// A dimension's score plus whether the feature column was constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionScore {
    pub value: f64,
    pub degenerate: bool,
}

/// A best-first permutation of the feature dimensions.
///
/// Constant-feature (degenerate) dimensions always sort after every live
/// dimension, ordered by index, so rankings are reproducible even on
/// pathological inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionModel {
    /// Permutation of `0..d`, best dimension first.
    pub ranking: Vec<usize>,
    /// Score per dimension, indexed by dimension (not by rank).
    pub scores: Vec<f64>,
    pub criterion: SelectionCriterion,
    pub rft: RftConfig,
    /// Constant-feature dimensions, ascending.
    pub degenerate_dims: Vec<usize>,
}

fn check_column(feature: &[f64], labels: &[f64], op: &str) -> Result<()> {
    if feature.len() != labels.len() {
        return Err(Error::domain(format!(
            "{op}: length mismatch {} vs {}",
            feature.len(),
            labels.len()
        )));
    }
    if feature.len() < 2 {
        return Err(Error::domain(format!(
            "{op}: need at least 2 samples, got {}",
            feature.len()
        )));
    }
    if feature.iter().chain(labels).any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{op}: non-finite input")));
    }
    Ok(())
}

/// Population variance of `labels`, the loss of predicting their mean.
fn label_variance(labels: &[f64]) -> f64 {
    let m = labels.len() as f64;
    let mut sum = 0.0;
    for &y in labels {
        sum += y;
    }
    let mean = sum / m;
    let mut sse = 0.0;
    for &y in labels {
        let d = y - mean;
        sse += d * d;
    }
    sse / m
}

/// Best weighted two-segment MSE over the candidate thresholds
/// f_b = min + (b/B)(max - min), b = 1..B-1, with the left segment taking
/// f <= t. An empty segment contributes zero loss with zero weight. A
/// constant feature cannot be split; it scores the full label variance
/// and is flagged degenerate.
pub fn rft_loss(feature: &[f64], labels: &[f64], config: &RftConfig) -> Result<DimensionScore> {
    check_column(feature, labels, "rft_loss")?;
    let m = feature.len();

    let mut fmin = feature[0];
    let mut fmax = feature[0];
    for &f in &feature[1..] {
        if f < fmin {
            fmin = f;
        }
        if f > fmax {
            fmax = f;
        }
    }
    if fmax == fmin {
        return Ok(DimensionScore {
            value: label_variance(labels),
            degenerate: true,
        });
    }

    let bins = config.bins();
    let range = fmax - fmin;
    let m_f = m as f64;
    let mut best = f64::INFINITY;
    for b in 1..bins {
        let t = fmin + (b as f64 / bins as f64) * range;

        let mut n_left = 0usize;
        let mut sum_left = 0.0;
        let mut n_right = 0usize;
        let mut sum_right = 0.0;
        for i in 0..m {
            if feature[i] <= t {
                n_left += 1;
                sum_left += labels[i];
            } else {
                n_right += 1;
                sum_right += labels[i];
            }
        }
        let mean_left = if n_left > 0 { sum_left / n_left as f64 } else { 0.0 };
        let mean_right = if n_right > 0 { sum_right / n_right as f64 } else { 0.0 };

        let mut sse_left = 0.0;
        let mut sse_right = 0.0;
        for i in 0..m {
            if feature[i] <= t {
                let d = labels[i] - mean_left;
                sse_left += d * d;
            } else {
                let d = labels[i] - mean_right;
                sse_right += d * d;
            }
        }
        let mse_left = if n_left > 0 { sse_left / n_left as f64 } else { 0.0 };
        let mse_right = if n_right > 0 { sse_right / n_right as f64 } else { 0.0 };
        let loss = (n_left as f64 * mse_left + n_right as f64 * mse_right) / m_f;
        best = best.min(loss);
    }

    Ok(DimensionScore {
        value: best,
        degenerate: false,
    })
}

/// Signed Spearman correlation between a feature column and the labels.
/// A constant feature scores 0 and is flagged degenerate; constant labels
/// score 0 without flagging the dimension.
pub fn spearman_score(feature: &[f64], labels: &[f64]) -> Result<DimensionScore> {
    check_column(feature, labels, "spearman_score")?;
    let constant = feature.iter().all(|&f| f == feature[0]);
    if constant {
        return Ok(DimensionScore {
            value: 0.0,
            degenerate: true,
        });
    }
    let corr = spearman_corr(feature, labels)?;
    Ok(DimensionScore {
        value: corr.rho,
        degenerate: false,
    })
}

/// Score every feature column and sort dimensions best-first.
///
/// Ties between equal scores break toward the lower dimension index;
/// degenerate dimensions go last, by index. Re-running on the same inputs
/// reproduces the ranking bit for bit regardless of thread count.
pub fn rank_dimensions(
    fm: &PairFeatureMatrix,
    criterion: SelectionCriterion,
    config: &RftConfig,
) -> Result<SelectionModel> {
    let d = fm.dim();
    if d == 0 {
        return Err(Error::domain("rank_dimensions: no feature columns"));
    }

    let columns: Vec<Vec<f64>> = (0..d).map(|j| fm.features.column(j).to_vec()).collect();
    let scored: Vec<DimensionScore> = columns
        .par_iter()
        .map(|col| match criterion {
            SelectionCriterion::Rft => rft_loss(col, &fm.labels, config),
            SelectionCriterion::Spearman => spearman_score(col, &fm.labels),
            SelectionCriterion::SpearmanAbs => spearman_score(col, &fm.labels).map(|s| {
                DimensionScore {
                    value: s.value.abs(),
                    degenerate: s.degenerate,
                }
            }),
        })
        .collect::<Result<_>>()?;

    let mut ranking: Vec<usize> = (0..d).collect();
    ranking.sort_by(|&a, &b| {
        match (scored[a].degenerate, scored[b].degenerate) {
            (false, true) => std::cmp::Ordering::Less,
            (true, false) => std::cmp::Ordering::Greater,
            (true, true) => a.cmp(&b),
            (false, false) => {
                let ord = match criterion {
                    SelectionCriterion::Rft => scored[a].value.total_cmp(&scored[b].value),
                    SelectionCriterion::Spearman | SelectionCriterion::SpearmanAbs => {
                        scored[b].value.total_cmp(&scored[a].value)
                    }
                };
                ord.then(a.cmp(&b))
            }
        }
    });

    let degenerate_dims = (0..d).filter(|&j| scored[j].degenerate).collect();
    Ok(SelectionModel {
        ranking,
        scores: scored.iter().map(|s| s.value).collect(),
        criterion,
        rft: *config,
        degenerate_dims,
    })
}

impl SelectionModel {
    pub fn dim(&self) -> usize {
        self.ranking.len()
    }

    /// The best `k` dimension indices, best first.
    pub fn top_k(&self, k: usize) -> Result<&[usize]> {
        if k < 1 || k > self.ranking.len() {
            return Err(Error::domain(format!(
                "top_k: k={k} out of range 1..={}",
                self.ranking.len()
            )));
        }
        Ok(&self.ranking[..k])
    }

    /// Write the audit sidecar: a criterion/config header, then one
    /// `dim_index score` line per dimension, best-first.
    pub fn write_sidecar(&self, writer: &mut impl Write) -> std::io::Result<()> {
        writeln!(writer, "# criterion: {}", self.criterion.name())?;
        if self.criterion == SelectionCriterion::Rft {
            writeln!(writer, "# bins: {}", self.rft.bins())?;
        }
        for &dim in &self.ranking {
            writeln!(writer, "{dim} {}", self.scores[dim])?;
        }
        Ok(())
    }

    pub fn to_sidecar_string(&self) -> String {
        let mut out = Vec::new();
        self.write_sidecar(&mut out).expect("write to Vec");
        String::from_utf8(out).expect("sidecar is UTF-8")
    }
}
