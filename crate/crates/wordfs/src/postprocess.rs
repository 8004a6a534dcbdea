//! Common-mean and dominant-direction removal for embedding tables.
//!
//! The transform subtracts the vocabulary-wide mean vector from every
//! embedding, fits a PCA basis to the centered matrix, and removes each
//! row's projection onto the top `top_d` principal components. This makes
//! the vector set markedly more isotropic and is applied (optionally)
//! before feature selection, never after.

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::linalg::{column_mean, fit_pca, remove_projections};

/// Configuration for the post-processing transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpaConfig {
    /// Number of leading principal components to remove. Must be >= 1.
    pub top_d: usize,
}

impl Default for PpaConfig {
    fn default() -> Self {
        PpaConfig { top_d: 7 }
    }
}

/// Apply mean subtraction plus top-`top_d` principal component removal.
///
/// The output has the same vocabulary and dimension; its column mean is
/// zero to within rounding, and every row is orthogonal to the removed
/// components. Tables too small for the requested `top_d` are rejected
/// rather than clamped.
pub fn ppa(table: &EmbeddingTable, config: &PpaConfig) -> Result<EmbeddingTable> {
    let top_d = config.top_d;
    if top_d < 1 {
        return Err(Error::domain("ppa: top_d must be at least 1"));
    }
    let n = table.n_words();
    let d = table.dim();
    if n < top_d + 1 {
        return Err(Error::domain(format!(
            "ppa: need at least {min} words to remove {top_d} components, table has {n}",
            min = top_d + 1
        )));
    }
    if d <= top_d {
        return Err(Error::domain(format!(
            "ppa: dimension {d} must exceed top_d {top_d}"
        )));
    }

    let matrix = table.matrix();
    let mean = column_mean(matrix)?;
    let centered = &matrix - &mean.view().insert_axis(ndarray::Axis(0));
    let basis = fit_pca(centered.view(), top_d)?;
    let cleaned = remove_projections(centered.view(), &basis, top_d)?;
    Ok(table.with_matrix(cleaned))
}
