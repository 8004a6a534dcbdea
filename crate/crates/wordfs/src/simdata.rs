//! Word-similarity datasets: parsing, min-max scaling, overlap-averaged
//! aggregation, and deterministic k-fold splits.
//!
//! The pair file format is one `word1 word2 score` record per line,
//! separated by tabs or runs of spaces; `#` starts a comment line.
//!
//! Fold splits use an explicitly pinned shuffle so fixtures can be shared
//! across implementations: a Fisher-Yates pass over the pair indices,
//! driven by ChaCha20 seeded via `seed_from_u64`, drawing `j = next_u64()
//! mod (i + 1)` for i from n-1 down to 1, followed by round-robin
//! assignment of the shuffled order to folds. This generator choice is
//! part of the public contract and must not change silently.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// One human-scored word pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub word1: String,
    pub word2: String,
    pub score: f64,
}

/// A named list of scored word pairs. Pairs may reference words that are
/// out of vocabulary for any particular embedding table; resolution
/// happens at feature-extraction or evaluation time.
#[derive(Debug, Clone)]
pub struct WordPairDataset {
    pub name: String,
    pub pairs: Vec<WordPair>,
}

/// A deterministic assignment of pair indices to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub seed: u64,
    pub k: usize,
    /// `assignments[pair_index]` is the fold id in `0..k`.
    pub assignments: Vec<usize>,
}

impl FoldSplit {
    /// Pair indices of fold `f`, ascending.
    pub fn fold_indices(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == f)
            .map(|(i, _)| i)
            .collect()
    }

    /// Pair indices outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != f)
            .map(|(i, _)| i)
            .collect()
    }
}

impl WordPairDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<WordPair>) -> Self {
        WordPairDataset {
            name: name.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Load a pair file; the dataset is named after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<WordPairDataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pairs".to_string());
        Self::read_from(BufReader::new(file), path, name)
    }

    /// Parse pair records from any buffered reader.
    pub fn read_from(
        reader: impl BufRead,
        source: impl AsRef<Path>,
        name: impl Into<String>,
    ) -> Result<WordPairDataset> {
        let source = source.as_ref();
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("expected `word1 word2 score`, found {} fields", fields.len()),
                ));
            }
            let score: f64 = fields[2].parse().map_err(|_| {
                Error::parse(source, line_no, format!("non-numeric score {:?}", fields[2]))
            })?;
            if !score.is_finite() {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("non-finite score {:?}", fields[2]),
                ));
            }
            pairs.push(WordPair {
                word1: fields[0].to_string(),
                word2: fields[1].to_string(),
                score,
            });
        }
        Ok(WordPairDataset::new(name, pairs))
    }

    /// Write the dataset as tab-separated records with round-trip scores.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_to(&mut writer).map_err(|e| Error::io(path, e))?;
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to(&self, writer: &mut impl Write) -> std::io::Result<()> {
        for p in &self.pairs {
            writeln!(writer, "{}\t{}\t{}", p.word1, p.word2, p.score)?;
        }
        Ok(())
    }

    /// Rescale scores to [0, 1] using the dataset's own observed min and
    /// max. A dataset with constant scores cannot be scaled.
    pub fn minmax_scaled(&self) -> Result<WordPairDataset> {
        if self.pairs.is_empty() {
            return Err(Error::domain(format!(
                "{}: cannot scale an empty dataset",
                self.name
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pairs {
            lo = lo.min(p.score);
            hi = hi.max(p.score);
        }
        if hi == lo {
            return Err(Error::domain(format!(
                "{}: all scores equal {lo}, min-max scaling undefined",
                self.name
            )));
        }
        let range = hi - lo;
        let pairs = self
            .pairs
            .iter()
            .map(|p| WordPair {
                word1: p.word1.clone(),
                word2: p.word2.clone(),
                score: (p.score - lo) / range,
            })
            .collect();
        Ok(WordPairDataset::new(self.name.clone(), pairs))
    }
}

fn overlap_key(p: &WordPair) -> (String, String) {
    let a = p.word1.to_lowercase();
    let b = p.word2.to_lowercase();
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Merge already-scaled datasets: scores of pairs sharing an unordered,
/// case-folded word pair are averaged (including repeats within a single
/// dataset); output order is first appearance of each key.
pub fn aggregate(datasets: &[WordPairDataset]) -> Result<WordPairDataset> {
    if datasets.is_empty() {
        return Err(Error::domain("aggregate: no datasets given"));
    }
    for ds in datasets {
        for p in &ds.pairs {
            if !(0.0..=1.0).contains(&p.score) {
                return Err(Error::domain(format!(
                    "{}: score {} outside [0, 1]; aggregate expects min-max scaled inputs",
                    ds.name, p.score
                )));
            }
        }
    }

    struct Entry {
        word1: String,
        word2: String,
        sum: f64,
        count: usize,
    }

    let mut by_key: HashMap<(String, String), usize> = HashMap::new();
    let mut entries: Vec<Entry> = Vec::new();
    for ds in datasets {
        for p in &ds.pairs {
            let key = overlap_key(p);
            match by_key.get(&key) {
                Some(&i) => {
                    entries[i].sum += p.score;
                    entries[i].count += 1;
                }
                None => {
                    by_key.insert(key, entries.len());
                    entries.push(Entry {
                        word1: p.word1.clone(),
                        word2: p.word2.clone(),
                        sum: p.score,
                        count: 1,
                    });
                }
            }
        }
    }

    let pairs = entries
        .into_iter()
        .map(|e| WordPair {
            word1: e.word1,
            word2: e.word2,
            score: e.sum / e.count as f64,
        })
        .collect();
    Ok(WordPairDataset::new("aggregate", pairs))
}

/// Deterministically split `ds` into `k` folds using the pinned shuffle
/// described in the module docs. Identical `(ds, k, seed)` inputs yield
/// identical assignments on every platform.
pub fn kfold_split(ds: &WordPairDataset, k: usize, seed: u64) -> Result<FoldSplit> {
    let m = ds.pairs.len();
    if k < 2 {
        return Err(Error::domain(format!("kfold_split: k={k} must be >= 2")));
    }
    if m < k {
        return Err(Error::domain(format!(
            "kfold_split: {m} pairs cannot fill {k} folds"
        )));
    }

    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in (1..m).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }

    let mut assignments = vec![0usize; m];
    for (pos, &idx) in order.iter().enumerate() {
        assignments[idx] = pos % k;
    }
    Ok(FoldSplit {
        seed,
        k,
        assignments,
    })
}
