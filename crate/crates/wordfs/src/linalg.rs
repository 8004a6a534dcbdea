//! Deterministic dense linear algebra: means, PCA, projection removal,
//! cosine similarity, and rank transforms.
//!
//! Every function here is a pure function of its inputs, uses a fixed
//! summation order, and yields results independent of the rayon thread
//! count, so downstream dimension rankings are reproducible bit for bit.

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count per parallel accumulation chunk. Fixed (not thread-dependent)
/// so covariance sums are identical for any degree of parallelism.
const CHUNK_ROWS: usize = 4096;

/// Eigenvalues below `max_eigenvalue * RANK_EPS` count as rank-deficient.
const RANK_EPS: f64 = 1e-12;

/// An ordered orthonormal principal-component basis plus the mean vector
/// of the data it was fit on.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    /// Column mean of the input matrix, length d.
    pub mean: Array1<f64>,
    /// One unit-norm component per row, most-variant first (r x d).
    pub components: Array2<f64>,
    /// Sample variance along each component, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaBasis {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }
}

/// Outcome of a Spearman correlation, carrying the degeneracy flag for
/// constant inputs (which score 0 rather than NaN).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankCorrelation {
    pub rho: f64,
    pub degenerate: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Arithmetic mean of the rows of `matrix`.
pub fn column_mean(matrix: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(Error::domain("column_mean: empty matrix"));
    }
    let mut mean = Array1::zeros(matrix.ncols());
    for row in matrix.rows() {
        mean += &row;
    }
    mean /= n as f64;
    Ok(mean)
}

/// Upper-triangle covariance accumulation over one block of rows.
fn block_scatter(block: ArrayView2<'_, f64>, mean: &[f64]) -> Vec<f64> {
    let d = block.ncols();
    let mut acc = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in block.rows() {
        for (j, v) in row.iter().enumerate() {
            centered[j] = v - mean[j];
        }
        for j in 0..d {
            let cj = centered[j];
            let dst = &mut acc[j * d..(j + 1) * d];
            for l in j..d {
                dst[l] += cj * centered[l];
            }
        }
    }
    acc
}

fn covariance(matrix: ArrayView2<'_, f64>, mean: &Array1<f64>) -> Array2<f64> {
    let n = matrix.nrows();
    let d = matrix.ncols();
    let mean = mean.as_slice().expect("contiguous mean");

    let n_chunks = n.div_ceil(CHUNK_ROWS);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK_ROWS;
            let hi = (lo + CHUNK_ROWS).min(n);
            block_scatter(matrix.slice(ndarray::s![lo..hi, ..]), mean)
        })
        .collect();

    // Sum partials in chunk order so the result is thread-count independent.
    let mut scatter = vec![0.0; d * d];
    for part in &partials {
        for (s, p) in scatter.iter_mut().zip(part) {
            *s += p;
        }
    }

    let denom = (n - 1) as f64;
    let mut cov = Array2::zeros((d, d));
    for j in 0..d {
        for l in j..d {
            let v = scatter[j * d + l] / denom;
            cov[[j, l]] = v;
            cov[[l, j]] = v;
        }
    }
    cov
}

/// Fit a PCA basis: the top-`r` principal directions of the row-centered
/// matrix, via a symmetric eigensolve of the sample covariance.
///
/// Components follow a deterministic sign convention: the entry of largest
/// absolute value in each component is positive, ties broken by lowest
/// index. Errors if `r` is out of range or the input has rank below `r`.
pub fn fit_pca(matrix: ArrayView2<'_, f64>, r: usize) -> Result<PcaBasis> {
    let n = matrix.nrows();
    let d = matrix.ncols();
    if n < 2 {
        return Err(Error::domain(format!(
            "fit_pca: need at least 2 rows, got {n}"
        )));
    }
    let r_max = (n - 1).min(d);
    if r < 1 || r > r_max {
        return Err(Error::domain(format!(
            "fit_pca: r={r} out of range 1..={r_max} for a {n}x{d} matrix"
        )));
    }

    let mean = column_mean(matrix)?;
    let cov = covariance(matrix, &mean);

    let sym = nalgebra::DMatrix::from_fn(d, d, |i, j| cov[[i, j]]);
    let eig = nalgebra::SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let tol = lambda_max * RANK_EPS;
    let achievable = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > tol)
        .count();
    if achievable < r {
        return Err(Error::domain(format!(
            "fit_pca: requested {r} components but input has achievable rank {achievable}"
        )));
    }

    let mut components = Array2::zeros((r, d));
    let mut explained_variance = Vec::with_capacity(r);
    for (out_i, &src) in order.iter().take(r).enumerate() {
        let col = eig.eigenvectors.column(src);
        // Sign convention: largest-|entry| coordinate made positive.
        let mut best = 0;
        for j in 1..d {
            if col[j].abs() > col[best].abs() {
                best = j;
            }
        }
        let flip = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[[out_i, j]] = flip * col[j];
        }
        explained_variance.push(eig.eigenvalues[src].max(0.0));
    }

    Ok(PcaBasis {
        mean,
        components,
        explained_variance,
    })
}

/// Remove from every row its projection onto the first `top_d` components
/// of `basis`: v' = v - sum_i (u_i . v) u_i.
///
/// Rows are assumed already mean-subtracted by the caller where that
/// matters; this routine touches only the component subspace.
pub fn remove_projections(
    matrix: ArrayView2<'_, f64>,
    basis: &PcaBasis,
    top_d: usize,
) -> Result<Array2<f64>> {
    if top_d > basis.n_components() {
        return Err(Error::domain(format!(
            "remove_projections: top_d={top_d} exceeds {} available components",
            basis.n_components()
        )));
    }
    let d = matrix.ncols();
    if d != basis.components.ncols() {
        return Err(Error::domain(format!(
            "remove_projections: matrix has {d} columns but basis expects {}",
            basis.components.ncols()
        )));
    }

    let components: Vec<&[f64]> = (0..top_d)
        .map(|i| basis.components.row(i).to_slice().expect("contiguous"))
        .collect();

    let mut out = matrix.to_owned();
    let data = out.as_slice_mut().expect("standard layout");
    data.par_chunks_mut(d).for_each(|row| {
        // Coefficients all from the original row, then one subtraction
        // pass per component, in component order.
        let coeffs: Vec<f64> = components.iter().map(|u| dot(u, row)).collect();
        for (u, &c) in components.iter().zip(&coeffs) {
            for j in 0..d {
                row[j] -= c * u[j];
            }
        }
    });
    Ok(out)
}

/// Cosine similarity a.b / (|a||b|), clamped to [-1, 1].
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "cosine_similarity: length mismatch {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::domain("cosine_similarity: zero-norm input"));
    }
    // Identical vectors are exactly 1; the rounded quotient can land one
    // ulp away, which matters to rank-based consumers.
    if a == b {
        return Ok(1.0);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Ascending fractional ranks starting at 1; tied values receive the mean
/// of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; m];
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share the mean rank.
        let rank = (start + end - 1) as f64 / 2.0 + 1.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: the Pearson correlation of the fractional
/// ranks of `x` and `y`. A constant input has no rank variance; it yields
/// rho = 0 with the degenerate flag raised instead of NaN.
pub fn spearman_corr(x: &[f64], y: &[f64]) -> Result<RankCorrelation> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "spearman_corr: length mismatch {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let m = x.len();
    if m < 2 {
        return Err(Error::domain(format!(
            "spearman_corr: need at least 2 samples, got {m}"
        )));
    }

    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let mean_x = rx.iter().sum::<f64>() / m as f64;
    let mean_y = ry.iter().sum::<f64>() / m as f64;

    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..m {
        let dx = rx[i] - mean_x;
        let dy = ry[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }

    if var_x == 0.0 || var_y == 0.0 {
        return Ok(RankCorrelation {
            rho: 0.0,
            degenerate: true,
        });
    }
    // Identical (or mirrored) rank vectors produce bitwise-equal moments,
    // so perfect correlation comes out as exactly +/-1.
    let rho = if cov == var_x && var_x == var_y {
        1.0
    } else if cov == -var_x && var_x == var_y {
        -1.0
    } else {
        (cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(RankCorrelation {
        rho,
        degenerate: false,
    })
}
