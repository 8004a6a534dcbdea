//! Independent reference implementations and fixture builders shared by
//! the integration suites. Everything here is deliberately naive and kept
//! separate from the library's own computation paths.

#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use wordfs::{EmbeddingTable, WordPair, WordPairDataset};

/// Standard normal sample by Box-Muller, deterministic given the rng.
pub fn sample_normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Naive sample covariance: explicit double loop, no chunking.
pub fn covariance_naive(matrix: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    let n = matrix.nrows();
    let d = matrix.ncols();
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            mean[j] += matrix[[i, j]];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..n {
        for p in 0..d {
            for q in 0..d {
                cov[p][q] += (matrix[[i, p]] - mean[p]) * (matrix[[i, q]] - mean[q]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    cov
}

/// Full symmetric eigensolve by the cyclic Jacobi rotation method.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..d {
            for q in 0..d {
                if p != q {
                    off += a[p][q] * a[p][q];
                }
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..d.saturating_sub(1) {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let eigenvalues = (0..d).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Brute-force PCA: naive covariance, Jacobi eigensolve, eigenvalue-sorted
/// components with the largest-|entry|-positive sign convention. Returns
/// the top-r components as rows.
pub fn pca_oracle(matrix: ArrayView2<'_, f64>, r: usize) -> Vec<Vec<f64>> {
    let d = matrix.ncols();
    let cov = covariance_naive(matrix);
    let (eigenvalues, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eigenvalues[y].total_cmp(&eigenvalues[x]).then(x.cmp(&y)));
    let mut components = Vec::with_capacity(r);
    for &col in order.iter().take(r) {
        let mut comp: Vec<f64> = (0..d).map(|row| vectors[row][col]).collect();
        let mut best = 0;
        for j in 1..d {
            if comp[j].abs() > comp[best].abs() {
                best = j;
            }
        }
        if comp[best] < 0.0 {
            for c in comp.iter_mut() {
                *c = -*c;
            }
        }
        components.push(comp);
    }
    components
}

/// Fractional ranks by the counting definition: rank_i = #(smaller) +
/// (#(equal) + 1) / 2, counting the element itself as equal.
pub fn ranks_by_counting(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut ranks = vec![0.0; m];
    for i in 0..m {
        let mut less = 0usize;
        let mut equal = 0usize;
        for j in 0..m {
            if values[j] < values[i] {
                less += 1;
            } else if values[j] == values[i] {
                equal += 1;
            }
        }
        ranks[i] = less as f64 + (equal as f64 + 1.0) / 2.0;
    }
    ranks
}

/// Pearson correlation via the raw-moment formula.
pub fn pearson_raw_moments(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let num = m * sxy - sx * sy;
    let den = (m * sxx - sx * sx).sqrt() * (m * syy - sy * sy).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Naive Spearman: counting ranks, then raw-moment Pearson.
pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson_raw_moments(&ranks_by_counting(x), &ranks_by_counting(y))
}

/// Naive cosine: the textbook quotient, no clamping or shortcuts.
pub fn cosine_oracle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Threshold-enumeration reference for the two-segment regression loss:
/// candidate thresholds f_b = min + (b/B)(max - min) for b = 1..B-1, left
/// segment f <= t, each side's MSE against its own label mean, weighted
/// by segment size; empty segments contribute zero at zero weight.
pub fn rft_oracle(feature: &[f64], labels: &[f64], bins: usize) -> f64 {
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
    assert!(fmax > fmin, "oracle expects a non-constant feature");

    let range = fmax - fmin;
    let mut best = f64::INFINITY;
    for b in 1..bins {
        let t = fmin + (b as f64 / bins as f64) * range;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in 0..m {
            if feature[i] <= t {
                left.push(labels[i]);
            } else {
                right.push(labels[i]);
            }
        }
        let mse = |side: &[f64]| -> f64 {
            if side.is_empty() {
                return 0.0;
            }
            let mut sum = 0.0;
            for &v in side {
                sum += v;
            }
            let mean = sum / side.len() as f64;
            let mut sse = 0.0;
            for &v in side {
                let d = v - mean;
                sse += d * d;
            }
            sse / side.len() as f64
        };
        let loss =
            (left.len() as f64 * mse(&left) + right.len() as f64 * mse(&right)) / m as f64;
        best = best.min(loss);
    }
    best
}

/// Population variance of the labels, the no-split loss.
pub fn label_variance_oracle(labels: &[f64]) -> f64 {
    let m = labels.len() as f64;
    let mean: f64 = labels.iter().sum::<f64>() / m;
    labels.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / m
}

pub fn random_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0))
}

pub fn random_table(n: usize, d: usize, seed: u64) -> EmbeddingTable {
    EmbeddingTable::new(
        (0..n).map(|i| format!("w{i}")).collect(),
        random_matrix(n, d, seed),
    )
    .unwrap()
}

/// Distinct non-self word pairs with random scores over `n_words` tokens
/// named w0..w{n-1}.
pub fn distinct_random_pairs(
    n_words: usize,
    n_pairs: usize,
    seed: u64,
    name: &str,
) -> WordPairDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::with_capacity(n_pairs);
    while pairs.len() < n_pairs {
        let a = rng.gen_range(0..n_words);
        let b = rng.gen_range(0..n_words);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            continue;
        }
        pairs.push(WordPair {
            word1: format!("w{a}"),
            word2: format!("w{b}"),
            score: rng.gen_range(0.0..1.0),
        });
    }
    WordPairDataset::new(name, pairs)
}

/// Size parameters of the planted-signal fixture.
pub const PLANTED_WORDS: usize = 1000;
pub const PLANTED_DIM: usize = 60;
pub const PLANTED_SIGNAL_DIMS: usize = 10;
pub const PLANTED_PAIRS: usize = 300;

/// A synthetic table whose first ten coordinates carry all pair
/// similarity: those coordinates are an i.i.d. Gaussian code per word, the
/// remaining fifty are independent Gaussian noise of the same scale, and
/// each pair's label is the cosine of the two signal sub-vectors.
pub fn planted_fixture(seed: u64) -> (EmbeddingTable, WordPairDataset, Vec<usize>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let matrix =
        Array2::from_shape_fn((PLANTED_WORDS, PLANTED_DIM), |_| sample_normal(&mut rng));
    let table = EmbeddingTable::new(
        (0..PLANTED_WORDS).map(|i| format!("w{i}")).collect(),
        matrix.clone(),
    )
    .unwrap();

    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::with_capacity(PLANTED_PAIRS);
    while pairs.len() < PLANTED_PAIRS {
        let a = rng.gen_range(0..PLANTED_WORDS);
        let b = rng.gen_range(0..PLANTED_WORDS);
        if a == b {
            continue;
        }
        if !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let za: Vec<f64> = (0..PLANTED_SIGNAL_DIMS).map(|j| matrix[[a, j]]).collect();
        let zb: Vec<f64> = (0..PLANTED_SIGNAL_DIMS).map(|j| matrix[[b, j]]).collect();
        pairs.push(WordPair {
            word1: format!("w{a}"),
            word2: format!("w{b}"),
            score: cosine_oracle(&za, &zb),
        });
    }
    let planted: Vec<usize> = (0..PLANTED_SIGNAL_DIMS).collect();
    (table, WordPairDataset::new("planted", pairs), planted)
}
