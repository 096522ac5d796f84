//! Sentence embedding block: precomputed vectors from disk or a hashed
//! bag-of-n-grams fallback.
//!
//! File format: a `#dim=<D>` first line, optional further `#` comment lines,
//! then `key<TAB>v1<TAB>...<TAB>vD` rows. Context-augmented vectors use the
//! key suffix `#ctx`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::Segment;
use crate::error::{read_text, write_text, Error, Result};

pub const DEFAULT_DIM: usize = 1024;
pub const CONTEXT_SUFFIX: &str = "#ctx";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Signed feature hashing of unigrams then `_`-joined adjacent bigrams,
/// L2-normalized unless nothing was hashed.
pub fn hash_embed(tokens: &[String], dim: usize) -> Vec<f64> {
    assert!(dim >= 1, "embedding dimension must be at least 1");
    let mut v = vec![0.0; dim];
    let mut add = |feature: &str| {
        let h = fnv1a64(feature.as_bytes());
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[(h % dim as u64) as usize] += sign;
    };
    for t in tokens {
        add(t);
    }
    for pair in tokens.windows(2) {
        add(&format!("{}_{}", pair[0], pair[1]));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    comments: Vec<String>,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            comments: Vec::new(),
            vectors: BTreeMap::new(),
        }
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

    /// Header comment lines after `#dim=`, without the leading `#`.
    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                what: format!("embedding {key}"),
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "embedding {key} has non-finite components"
            )));
        }
        if self.vectors.contains_key(&key) {
            return Err(Error::DuplicateKey(key));
        }
        self.vectors.insert(key, vector);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
        let dim: usize = header
            .strip_prefix("#dim=")
            .and_then(|d| d.trim().parse().ok())
            .filter(|d| *d >= 1)
            .ok_or_else(|| Error::parse(path, 1, "missing `#dim=<D>` header"))?;
        let mut store = EmbeddingStore::new(dim);
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                store.comments.push(comment.trim().to_string());
                continue;
            }
            let mut fields = line.split('\t');
            let key = fields.next().unwrap_or_default().to_string();
            let values = fields
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(path, line_no, format!("invalid number {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != dim {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {dim} values, found {}", values.len()),
                ));
            }
            store
                .insert(key, values)
                .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        }
        Ok(store)
    }

    /// Serializes with 9 significant digits per component.
    pub fn to_text(&self) -> String {
        let mut out = format!("#dim={}\n", self.dim);
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        for (key, v) in &self.vectors {
            out.push_str(key);
            for x in v {
                out.push_str(&format!("\t{x:.8e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }
}

#[derive(Debug, Clone)]
pub enum EmbeddingProvider {
    Store(EmbeddingStore),
    Hash { dim: usize },
}

impl EmbeddingProvider {
    pub fn id(&self) -> &'static str {
        match self {
            EmbeddingProvider::Store(_) => "store",
            EmbeddingProvider::Hash { .. } => "hash-fnv1a",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EmbeddingProvider::Store(s) => s.dim(),
            EmbeddingProvider::Hash { dim } => *dim,
        }
    }

    pub fn get_embedding(&self, segment: &Segment, use_context: bool) -> Result<Vec<f64>> {
        match self {
            EmbeddingProvider::Hash { dim } => {
                if use_context {
                    Ok(hash_embed(&segment.tokens_with_context(), *dim))
                } else {
                    Ok(hash_embed(&segment.tokens, *dim))
                }
            }
            EmbeddingProvider::Store(store) => {
                let mut key = segment.key.to_string();
                if use_context {
                    key.push_str(CONTEXT_SUFFIX);
                }
                store
                    .get(&key)
                    .map(<[f64]>::to_vec)
                    .ok_or(Error::MissingKey(key))
            }
        }
    }
}
