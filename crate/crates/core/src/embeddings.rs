//! Pre-trained word vectors and tweet embeddings.
//!
//! Tables are read from the plain-text word2vec/fastText layout: an optional
//! `count dim` header, then one `token v1 ... v_dim` line per word.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Default number of rows in a tweet matrix.
pub const DEFAULT_MAX_LEN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    oov: Vec<f64>,
}

/// Loader bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub loaded: usize,
    pub skipped: usize,
    pub header: Option<(usize, usize)>,
}

impl EmbeddingTable {
    /// Builds a table with a zero out-of-vocabulary vector.
    pub fn new(dim: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if let Some(v) = vectors.values().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        Ok(EmbeddingTable {
            dim,
            vectors,
            oov: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn oov_vector(&self) -> &[f64] {
        &self.oov
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn lookup(&self, token: &str) -> &[f64] {
        self.vectors.get(token).map_or(&self.oov, Vec::as_slice)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Mean of the token vectors; the OOV vector for an empty list.
    pub fn embed_average<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        if tokens.is_empty() {
            return self.oov.clone();
        }
        let mut acc = vec![0.0; self.dim];
        for t in tokens {
            for (a, v) in acc.iter_mut().zip(self.lookup(t.as_ref())) {
                *a += v;
            }
        }
        let n = tokens.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Token vectors stacked into a zero-padded `max_len × dim` matrix.
    pub fn embed_sequence<S: AsRef<str>>(&self, tokens: &[S], max_len: usize) -> TweetMatrix {
        let true_len = tokens.len().min(max_len);
        let mut data = vec![0.0; max_len * self.dim];
        for (row, t) in data.chunks_exact_mut(self.dim).zip(&tokens[..true_len]) {
            row.copy_from_slice(self.lookup(t.as_ref()));
        }
        TweetMatrix {
            data,
            rows: max_len,
            dim: self.dim,
            true_len,
        }
    }
}

/// Row-major sequence of token vectors; rows from `true_len` on are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
    true_len: usize,
}

impl TweetMatrix {
    /// Wraps raw rows. Rows past `true_len` are zeroed.
    pub fn from_rows(rows: Vec<Vec<f64>>, dim: usize, true_len: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * dim);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            if i < true_len {
                data.extend(r);
            } else {
                data.extend(std::iter::repeat_n(0.0, dim));
            }
        }
        Ok(TweetMatrix {
            data,
            rows: n,
            dim,
            true_len: true_len.min(n),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn true_len(&self) -> usize {
        self.true_len
    }

    /// Row `i`, or `None` past the end.
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        (i < self.rows).then(|| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Same content with `extra` more padding rows.
    pub fn with_padding(&self, extra: usize) -> TweetMatrix {
        let mut data = self.data.clone();
        data.extend(std::iter::repeat_n(0.0, extra * self.dim));
        TweetMatrix {
            data,
            rows: self.rows + extra,
            dim: self.dim,
            true_len: self.true_len,
        }
    }
}

/// Writes the table with a `count dim` header, tokens in sorted order.
pub fn write_embeddings<W: std::io::Write>(table: &EmbeddingTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    let mut tokens: Vec<&str> = table.tokens().collect();
    tokens.sort_unstable();
    for t in tokens {
        write!(out, "{t}")?;
        for v in table.lookup(t) {
            write!(out, " {v:?}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn load_embeddings(path: &Path) -> Result<(EmbeddingTable, LoadStats)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text).map_err(|reason| Error::Embeddings {
        path: path.to_path_buf(),
        reason,
    })
}

/// Parses the text layout. Lines of the wrong arity, with unparsable values or
/// repeating an earlier token are skipped; more than half of the data lines
/// being skipped is fatal.
pub fn parse_embeddings(text: &str) -> std::result::Result<(EmbeddingTable, LoadStats), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let mut stats = LoadStats::default();
    let mut dim = None;

    if let Some(first) = lines.peek() {
        let fields: Vec<&str> = first.split_whitespace().collect();
        if let [count, d] = fields[..] {
            if let (Ok(count), Ok(d)) = (count.parse::<usize>(), d.parse::<usize>()) {
                stats.header = Some((count, d));
                dim = Some(d);
                lines.next();
            }
        }
    }

    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut total = 0usize;
    for line in lines {
        total += 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values: std::result::Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let Ok(values) = values else {
            stats.skipped += 1;
            continue;
        };
        let d = *dim.get_or_insert(values.len());
        if d == 0 || values.len() != d || vectors.contains_key(token) {
            stats.skipped += 1;
            continue;
        }
        vectors.insert(token.to_string(), values);
    }

    if total == 0 {
        return Err("no embedding vectors".into());
    }
    if stats.skipped * 2 > total {
        return Err(format!(
            "{} of {} lines have an inconsistent dimension or bad values",
            stats.skipped, total
        ));
    }
    stats.loaded = vectors.len();
    let table = EmbeddingTable::new(dim.unwrap_or(0), vectors).map_err(|e| e.to_string())?;
    Ok((table, stats))
}
