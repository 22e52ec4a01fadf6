//! Word-vector table loaded from the plain-text `word v1 ... vd` format.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable token → vector table. All vectors share one dimension.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    words: Vec<String>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            index: HashMap::new(),
            words: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Inserts a vector. An existing entry for `word` is kept.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        let word = word.into();
        if self.index.contains_key(&word) {
            return Ok(false);
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn from_pairs<'a, I>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Vec<f64>)>,
    {
        let mut t = EmbeddingTable::new(dim);
        for (w, v) in pairs {
            t.insert(w, &v)?;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `None` for an absent token, distinct from a stored zero vector.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn lookup(&self, word: &str) -> Result<&[f64]> {
        self.get(word).ok_or_else(|| Error::Lookup(word.to_string()))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Parses the text format. A first line of exactly two integers is treated
/// as a `count dim` header. Without `expected_dim` the dimension comes from
/// the header or the first data row.
pub fn read_embeddings<R: BufRead>(
    reader: R,
    expected_dim: Option<usize>,
    origin: &Path,
) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut dim = expected_dim;
    let mut row = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();

        if lineno == 1 && rest.len() == 1 {
            if let (Ok(_count), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                match dim {
                    Some(e) if e != d => {
                        return Err(Error::parse(
                            origin,
                            lineno,
                            format!("header declares dimension {d}, expected {e}"),
                        ))
                    }
                    _ => dim = Some(d),
                }
                continue;
            }
        }

        row.clear();
        for tok in &rest {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(origin, lineno, format!("cannot parse `{tok}` as a number"))
            })?;
            row.push(v);
        }
        let d = *dim.get_or_insert(row.len());
        if d == 0 {
            return Err(Error::parse(origin, lineno, "row has no vector components"));
        }
        if row.len() != d {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected {d} components, found {}", row.len()),
            ));
        }
        table
            .get_or_insert_with(|| EmbeddingTable::new(d))
            .insert(word, &row)?;
    }
    table.ok_or_else(|| Error::Format(format!("{}: no embedding rows", origin.display())))
}

pub fn load_embeddings(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), expected_dim, path)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity, clamped to [-1, 1]. Zero-norm input is an error.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Undefined("cosine of a zero-norm vector".into()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Top-`k` candidates by cosine to `query`, descending, ties broken by
/// token order. Candidates without a (nonzero) vector are skipped.
pub fn nearest_neighbors<'a, I>(
    query: &str,
    k: usize,
    candidates: I,
    table: &EmbeddingTable,
) -> Result<Vec<(String, f64)>>
where
    I: IntoIterator<Item = &'a str>,
{
    let q = table.lookup(query)?;
    let mut scored: Vec<(String, f64)> = Vec::new();
    for c in candidates {
        if let Some(v) = table.get(c) {
            if let Ok(s) = cosine(q, v) {
                scored.push((c.to_string(), s));
            }
        }
    }
    if scored.is_empty() {
        return Err(Error::Input(format!(
            "no candidate neighbors of `{query}` are embedded"
        )));
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.dedup_by(|a, b| a.0 == b.0);
    scored.truncate(k);
    Ok(scored)
}
