//! Word-category proportions from a LIWC-style dictionary.
//!
//! Dictionary layout, fields separated by tabs:
//!
//! ```text
//! %
//! 1    anger
//! 2    posemo
//! %
//! hate    1
//! kill*    1
//! love    2
//! ```
//!
//! A trailing `*` marks a prefix entry.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::error::{read_text, Error, Result};

#[derive(Debug, Clone, Default)]
pub struct CategoryLexicon {
    categories: Vec<String>,
    exact: HashMap<String, BTreeSet<usize>>,
    prefixes: HashMap<String, BTreeSet<usize>>,
    longest_prefix: usize,
}

impl CategoryLexicon {
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn exact_entries(&self) -> usize {
        self.exact.len()
    }

    pub fn prefix_entries(&self) -> usize {
        self.prefixes.len()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .collect();
        let separators: Vec<usize> = lines
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| l.trim() == "%")
            .map(|(i, _)| i)
            .collect();
        if separators.len() < 2 {
            return Err(Error::parse(
                path,
                lines.len().max(1),
                "expected two `%` separator lines",
            ));
        }
        let (first, second) = (separators[0], separators[1]);
        if let Some((line, _)) = lines[..first].iter().find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(path, *line, "content before the first `%`"));
        }

        let mut by_id: BTreeMap<u64, String> = BTreeMap::new();
        for &(line, raw) in &lines[first + 1..second] {
            if raw.trim().is_empty() {
                continue;
            }
            let mut parts = raw.split('\t').filter(|p| !p.is_empty());
            let (Some(id), Some(name)) = (parts.next(), parts.next()) else {
                return Err(Error::parse(path, line, "expected `id<TAB>name`"));
            };
            let id: u64 = id
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid category id {id:?}")))?;
            if by_id.insert(id, name.trim().to_string()).is_some() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("duplicate category id {id}"),
                ));
            }
        }
        let index_of: HashMap<u64, usize> =
            by_id.keys().enumerate().map(|(i, id)| (*id, i)).collect();

        let mut lex = CategoryLexicon {
            categories: by_id.into_values().collect(),
            ..Default::default()
        };
        for &(line, raw) in &lines[second + 1..] {
            if raw.trim().is_empty() || raw.trim() == "%" {
                continue;
            }
            let mut parts = raw.split('\t').filter(|p| !p.trim().is_empty());
            let Some(token) = parts.next() else { continue };
            let token = token.trim().to_lowercase();
            let mut cats = BTreeSet::new();
            for id in parts {
                let id: u64 = id
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("invalid category id {id:?}")))?;
                let idx = index_of
                    .get(&id)
                    .ok_or_else(|| Error::parse(path, line, format!("unknown category id {id}")))?;
                cats.insert(*idx);
            }
            match token.strip_suffix('*') {
                Some(prefix) => {
                    lex.longest_prefix = lex.longest_prefix.max(prefix.chars().count());
                    lex.prefixes
                        .entry(prefix.to_string())
                        .or_default()
                        .extend(cats);
                }
                None => lex.exact.entry(token).or_default().extend(cats),
            }
        }
        Ok(lex)
    }

    /// Categories a token belongs to: its exact entry, else its longest matching prefix.
    pub fn lookup(&self, token: &str) -> Option<&BTreeSet<usize>> {
        if let Some(cats) = self.exact.get(token) {
            return Some(cats);
        }
        let boundaries: Vec<usize> = token
            .char_indices()
            .map(|(b, _)| b)
            .chain(std::iter::once(token.len()))
            .skip(1)
            .take(self.longest_prefix)
            .collect();
        boundaries
            .iter()
            .rev()
            .find_map(|&end| self.prefixes.get(&token[..end]))
    }
}

/// Share of tokens (in `[0, 1]`) that fall into each category.
pub fn category_features(tokens: &[String], lex: &CategoryLexicon) -> Vec<f64> {
    let mut counts = vec![0usize; lex.len()];
    for token in tokens {
        if let Some(cats) = lex.lookup(token) {
            for &c in cats {
                counts[c] += 1;
            }
        }
    }
    let denom = tokens.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / denom).collect()
}
