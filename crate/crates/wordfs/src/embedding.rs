//! Parsing, holding, and serializing word-embedding tables.
//!
//! Two text formats are supported: `glove-text` (one `token v1 .. vd` line
//! per word) and `word2vec-text` (the same, preceded by a `n_words d`
//! header line). Values are stored as f64; writing uses the shortest
//! decimal representation that round-trips, so `load(save(t))` reproduces
//! every value bit for bit.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Text serialization format for embedding tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// One `token v1 v2 ... vd` line per word.
    GloveText,
    /// A leading `n_words d` header line, then glove-text rows.
    Word2vecText,
}

impl EmbeddingFormat {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingFormat::GloveText => "glove-text",
            EmbeddingFormat::Word2vecText => "word2vec-text",
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "glove-text" => Ok(EmbeddingFormat::GloveText),
            "word2vec-text" => Ok(EmbeddingFormat::Word2vecText),
            other => Err(format!(
                "unknown embedding format `{other}` (expected glove-text or word2vec-text)"
            )),
        }
    }
}

/// A vocabulary and its row-aligned dense embedding matrix.
///
/// Tokens are unique, every row has the same width, and every entry is
/// finite. The table is immutable after construction and safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    tokens: Vec<String>,
    matrix: Array2<f64>,
    index: HashMap<String, usize>,
}

/// A freshly loaded table plus bookkeeping about skipped duplicate tokens.
#[derive(Debug)]
pub struct LoadOutcome {
    pub table: EmbeddingTable,
    /// Rows dropped because their token already appeared (first kept).
    pub duplicates_skipped: usize,
}

impl EmbeddingTable {
    /// Build a table from tokens and a matching matrix, validating all
    /// invariants: non-empty, unique whitespace-free tokens, finite values.
    pub fn new(tokens: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if tokens.is_empty() || matrix.ncols() == 0 {
            return Err(Error::domain("embedding table must not be empty"));
        }
        if tokens.len() != matrix.nrows() {
            return Err(Error::domain(format!(
                "token count {} does not match matrix rows {}",
                tokens.len(),
                matrix.nrows()
            )));
        }
        for t in &tokens {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::domain(format!(
                    "token {t:?} is empty or contains whitespace, unsupported in text formats"
                )));
            }
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("embedding matrix contains non-finite values"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate token {t:?}")));
            }
        }
        Ok(EmbeddingTable {
            tokens,
            matrix,
            index,
        })
    }

    /// Internal constructor for matrices derived from an already-valid
    /// table (column selections, projections); skips the finiteness scan.
    pub(crate) fn from_parts(tokens: Vec<String>, matrix: Array2<f64>) -> Self {
        debug_assert_eq!(tokens.len(), matrix.nrows());
        debug_assert!(matrix.ncols() > 0);
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            index.insert(t.clone(), i);
        }
        EmbeddingTable {
            tokens,
            matrix,
            index,
        }
    }

    pub fn n_words(&self) -> usize {
        self.tokens.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix
            .row(i)
            .to_slice()
            .expect("embedding matrix is row-major")
    }

    /// Row index for a token: exact match first, then, with `fold_case`,
    /// the lower-cased token.
    pub fn resolve(&self, token: &str, fold_case: bool) -> Option<usize> {
        if let Some(&i) = self.index.get(token) {
            return Some(i);
        }
        if fold_case {
            if let Some(&i) = self.index.get(token.to_lowercase().as_str()) {
                return Some(i);
            }
        }
        None
    }

    /// Resolve a token to its vector. With `fold_case`, a miss retries the
    /// lower-cased token.
    pub fn lookup(&self, token: &str, fold_case: bool) -> Option<&[f64]> {
        self.resolve(token, fold_case).map(|i| self.row(i))
    }

    /// New table keeping only the given columns, in the given order.
    pub fn select_columns(&self, dims: &[usize]) -> Result<EmbeddingTable> {
        let d = self.dim();
        if dims.is_empty() {
            return Err(Error::domain("select_columns: no columns requested"));
        }
        let mut seen = vec![false; d];
        for &j in dims {
            if j >= d {
                return Err(Error::domain(format!(
                    "select_columns: column {j} out of range for dimension {d}"
                )));
            }
            if seen[j] {
                return Err(Error::domain(format!(
                    "select_columns: duplicate column {j}"
                )));
            }
            seen[j] = true;
        }
        let n = self.n_words();
        let mut out = Array2::zeros((n, dims.len()));
        for i in 0..n {
            let src = self.row(i);
            for (k, &j) in dims.iter().enumerate() {
                out[[i, k]] = src[j];
            }
        }
        Ok(EmbeddingTable::from_parts(self.tokens.clone(), out))
    }

    /// New table with the same vocabulary and a replacement matrix of the
    /// same row count (used by the post-processing and PCA pipelines).
    pub(crate) fn with_matrix(&self, matrix: Array2<f64>) -> EmbeddingTable {
        EmbeddingTable::from_parts(self.tokens.clone(), matrix)
    }

    /// New table containing only the given rows, in the given order.
    pub(crate) fn subset_rows(&self, rows: &[usize]) -> EmbeddingTable {
        let mut tokens = Vec::with_capacity(rows.len());
        let mut out = Array2::zeros((rows.len(), self.dim()));
        for (k, &i) in rows.iter().enumerate() {
            tokens.push(self.tokens[i].clone());
            out.row_mut(k).assign(&self.matrix.row(i));
        }
        EmbeddingTable::from_parts(tokens, out)
    }

    /// Load a table from a text file. With `limit`, only the first `limit`
    /// kept rows are read. Duplicate tokens keep the first occurrence and
    /// are counted in the outcome.
    pub fn load(
        path: impl AsRef<Path>,
        format: EmbeddingFormat,
        limit: Option<usize>,
    ) -> Result<LoadOutcome> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), path, format, limit)
    }

    /// Load from any buffered reader; `source` names the input in errors.
    pub fn read_from(
        reader: impl BufRead,
        source: impl AsRef<Path>,
        format: EmbeddingFormat,
        limit: Option<usize>,
    ) -> Result<LoadOutcome> {
        let source = source.as_ref();
        let mut lines = reader.lines();
        let mut line_no = 0usize;

        let mut declared: Option<(usize, usize)> = None;
        if format == EmbeddingFormat::Word2vecText {
            line_no += 1;
            let header = match lines.next() {
                Some(l) => l.map_err(|e| Error::io(source, e))?,
                None => return Err(Error::parse(source, 1, "empty embedding file")),
            };
            let fields: Vec<&str> = header.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::parse(
                    source,
                    1,
                    format!("expected header `n_words d`, found {} fields", fields.len()),
                ));
            }
            let n: usize = fields[0].parse().map_err(|_| {
                Error::parse(source, 1, format!("invalid word count {:?}", fields[0]))
            })?;
            let d: usize = fields[1].parse().map_err(|_| {
                Error::parse(source, 1, format!("invalid dimension {:?}", fields[1]))
            })?;
            if n == 0 || d == 0 {
                return Err(Error::parse(source, 1, "header declares an empty table"));
            }
            declared = Some((n, d));
        }

        let mut tokens: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut values: Vec<f64> = Vec::new();
        let mut dim: Option<usize> = declared.map(|(_, d)| d);
        let mut duplicates_skipped = 0usize;
        let mut data_lines = 0usize;

        for line in lines {
            let line = line.map_err(|e| Error::io(source, e))?;
            line_no += 1;
            data_lines += 1;

            let mut fields = line.split_whitespace();
            let token = match fields.next() {
                Some(t) => t,
                None => return Err(Error::parse(source, line_no, "blank line")),
            };

            let mut row: Vec<f64> = Vec::with_capacity(dim.unwrap_or(0));
            for field in fields {
                let v: f64 = field.parse().map_err(|_| {
                    Error::parse(source, line_no, format!("non-numeric field {field:?}"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(
                        source,
                        line_no,
                        format!("non-finite value {field:?}"),
                    ));
                }
                row.push(v);
            }

            let d = *dim.get_or_insert(row.len());
            if row.len() != d {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("row has {} values, expected {d}", row.len()),
                ));
            }
            if d == 0 {
                return Err(Error::parse(source, line_no, "row has no values"));
            }

            if index.contains_key(token) {
                duplicates_skipped += 1;
            } else {
                index.insert(token.to_string(), tokens.len());
                tokens.push(token.to_string());
                values.extend_from_slice(&row);
            }

            if let Some(limit) = limit {
                if tokens.len() == limit {
                    break;
                }
            }
        }

        if tokens.is_empty() {
            return Err(Error::parse(source, line_no.max(1), "empty embedding file"));
        }
        if limit.is_none() {
            if let Some((n, _)) = declared {
                if data_lines != n {
                    return Err(Error::parse(
                        source,
                        1,
                        format!("header declares {n} rows but file contains {data_lines}"),
                    ));
                }
            }
        }

        let d = dim.expect("dimension set by first row");
        let matrix = Array2::from_shape_vec((tokens.len(), d), values)
            .expect("row widths validated during parse");
        Ok(LoadOutcome {
            table: EmbeddingTable {
                tokens,
                matrix,
                index,
            },
            duplicates_skipped,
        })
    }

    /// Write the table to a file in the given format (LF line endings,
    /// shortest round-trip decimals).
    pub fn save(&self, path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::with_capacity(1 << 20, file);
        self.write_to(&mut writer, format)
            .map_err(|e| Error::io(path, e))?;
        writer.flush().map_err(|e| Error::io(path, e))
    }

    /// Write the table to any writer in the given format.
    pub fn write_to(&self, writer: &mut impl Write, format: EmbeddingFormat) -> std::io::Result<()> {
        if format == EmbeddingFormat::Word2vecText {
            writeln!(writer, "{} {}", self.n_words(), self.dim())?;
        }
        let mut buf = String::with_capacity(16 * self.dim());
        for (i, token) in self.tokens.iter().enumerate() {
            buf.clear();
            buf.push_str(token);
            for v in self.row(i) {
                buf.push(' ');
                // Display for f64 is the shortest decimal that parses back
                // to the same bits, which is what keeps round-trips exact.
                std::fmt::write(&mut buf, format_args!("{v}")).expect("string formatting");
            }
            buf.push('\n');
            writer.write_all(buf.as_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Cursor;

    fn read_str(
        text: &str,
        format: EmbeddingFormat,
        limit: Option<usize>,
    ) -> Result<LoadOutcome> {
        EmbeddingTable::read_from(Cursor::new(text.to_string()), "test.txt", format, limit)
    }

    #[test]
    fn glove_three_lines_four_floats() {
        let out = read_str(
            "a 1 2 3 4\nb 0.5 -0.5 1e-3 2\nc 0 0 0 1\n",
            EmbeddingFormat::GloveText,
            None,
        )
        .unwrap();
        assert_eq!(out.table.n_words(), 3);
        assert_eq!(out.table.dim(), 4);
        assert_eq!(out.duplicates_skipped, 0);
        assert_eq!(out.table.row(1)[2], 1e-3);
    }

    #[test]
    fn word2vec_header_and_rows() {
        let out = read_str("2 3\na 1 2 3\nb 4 5 6\n", EmbeddingFormat::Word2vecText, None).unwrap();
        assert_eq!(out.table.n_words(), 2);
        assert_eq!(out.table.dim(), 3);
    }

    #[test]
    fn short_second_row_cites_line_two() {
        let err = read_str("a 1 2 3\nb 1 2\n", EmbeddingFormat::GloveText, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("test.txt:2"), "{msg}");
        assert!(msg.contains("expected 3"), "{msg}");
    }

    #[test]
    fn non_numeric_field_is_parse_error() {
        let err = read_str("a 1 x 3\n", EmbeddingFormat::GloveText, None).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
    }

    #[test]
    fn nan_field_is_rejected() {
        let err = read_str("a 1 NaN 3\n", EmbeddingFormat::GloveText, None).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn empty_file_is_error() {
        assert!(read_str("", EmbeddingFormat::GloveText, None).is_err());
        assert!(read_str("", EmbeddingFormat::Word2vecText, None).is_err());
    }

    #[test]
    fn duplicates_keep_first_and_count() {
        let out = read_str(
            "a 1 2\nb 3 4\na 9 9\n",
            EmbeddingFormat::GloveText,
            None,
        )
        .unwrap();
        assert_eq!(out.table.n_words(), 2);
        assert_eq!(out.duplicates_skipped, 1);
        assert_eq!(out.table.lookup("a", false).unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn limit_truncates() {
        let out = read_str(
            "a 1 2\nb 3 4\nc 5 6\n",
            EmbeddingFormat::GloveText,
            Some(2),
        )
        .unwrap();
        assert_eq!(out.table.n_words(), 2);
        assert_eq!(out.table.tokens(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn header_row_count_mismatch_is_error() {
        let err = read_str("3 2\na 1 2\nb 3 4\n", EmbeddingFormat::Word2vecText, None).unwrap_err();
        assert!(err.to_string().contains("declares 3 rows"), "{err}");
    }

    #[test]
    fn lookup_case_folding() {
        let out = read_str("dog 1 0\ncat 0 1\n", EmbeddingFormat::GloveText, None).unwrap();
        let t = &out.table;
        assert_eq!(t.lookup("dog", false).unwrap(), &[1.0, 0.0]);
        assert_eq!(t.lookup("Dog", true).unwrap(), &[1.0, 0.0]);
        assert!(t.lookup("Dog", false).is_none());
        assert!(t.lookup("fish", true).is_none());
    }

    #[test]
    fn select_columns_identity_swap_and_errors() {
        let t = EmbeddingTable::new(
            vec!["a".into(), "b".into()],
            array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
        )
        .unwrap();

        let id = t.select_columns(&[0, 1, 2]).unwrap();
        assert_eq!(id.matrix(), t.matrix());

        let swapped = t.select_columns(&[2, 0]).unwrap();
        assert_eq!(swapped.matrix(), array![[3.0, 1.0], [6.0, 4.0]].view());

        assert!(t.select_columns(&[3]).is_err());
        assert!(t.select_columns(&[0, 0]).is_err());
        assert!(t.select_columns(&[]).is_err());
    }

    #[test]
    fn empty_table_cannot_be_constructed() {
        assert!(EmbeddingTable::new(vec![], Array2::zeros((0, 3))).is_err());
    }

    #[test]
    fn tokens_with_spaces_are_rejected() {
        let r = EmbeddingTable::new(vec!["new york".into()], array![[1.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let t = EmbeddingTable::new(
            vec!["a".into(), "b".into()],
            array![[0.1, -2.5e-17, 3.0], [1.0 / 3.0, 7.25, -0.0]],
        )
        .unwrap();
        for format in [EmbeddingFormat::GloveText, EmbeddingFormat::Word2vecText] {
            let mut bytes = Vec::new();
            t.write_to(&mut bytes, format).unwrap();
            let back = EmbeddingTable::read_from(Cursor::new(bytes), "mem", format, None)
                .unwrap()
                .table;
            assert_eq!(back.tokens(), t.tokens());
            assert_eq!(back.matrix(), t.matrix());
        }
    }
}
