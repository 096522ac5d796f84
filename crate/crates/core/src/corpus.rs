//! Articles, span annotations and segment extraction.
//!
//! Span offsets are counted in Unicode scalar values (Rust `char`s), never
//! bytes. Offsets are resolved on the raw article text; cleaning is applied to
//! the extracted substring afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_text, Error, Result};

/// Default number of context tokens taken on each side of a span.
pub const DEFAULT_CONTEXT_WINDOW: usize = 3;

/// The fourteen technique classes. The declaration order fixes the class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TechniqueLabel {
    LoadedLanguage,
    NameCallingLabeling,
    Repetition,
    FlagWaving,
    ExaggerationMinimisation,
    Doubt,
    AppealToFearPrejudice,
    Slogans,
    WhataboutismStrawMenRedHerring,
    BlackAndWhiteFallacy,
    AppealToAuthority,
    CausalOversimplification,
    BandwagonReductioAdHitlerum,
    ThoughtTerminatingCliches,
}

impl TechniqueLabel {
    pub const COUNT: usize = 14;

    pub const ALL: [TechniqueLabel; Self::COUNT] = [
        TechniqueLabel::LoadedLanguage,
        TechniqueLabel::NameCallingLabeling,
        TechniqueLabel::Repetition,
        TechniqueLabel::FlagWaving,
        TechniqueLabel::ExaggerationMinimisation,
        TechniqueLabel::Doubt,
        TechniqueLabel::AppealToFearPrejudice,
        TechniqueLabel::Slogans,
        TechniqueLabel::WhataboutismStrawMenRedHerring,
        TechniqueLabel::BlackAndWhiteFallacy,
        TechniqueLabel::AppealToAuthority,
        TechniqueLabel::CausalOversimplification,
        TechniqueLabel::BandwagonReductioAdHitlerum,
        TechniqueLabel::ThoughtTerminatingCliches,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// The annotation-file spelling of the technique.
    pub fn name(self) -> &'static str {
        match self {
            TechniqueLabel::LoadedLanguage => "loaded language",
            TechniqueLabel::NameCallingLabeling => "name calling,labeling",
            TechniqueLabel::Repetition => "repetition",
            TechniqueLabel::FlagWaving => "flag waving",
            TechniqueLabel::ExaggerationMinimisation => "exaggeration,minimisation",
            TechniqueLabel::Doubt => "doubt",
            TechniqueLabel::AppealToFearPrejudice => "appeal to fear-prejudice",
            TechniqueLabel::Slogans => "slogans",
            TechniqueLabel::WhataboutismStrawMenRedHerring => "whataboutism,straw men,red herring",
            TechniqueLabel::BlackAndWhiteFallacy => "black-and-white fallacy",
            TechniqueLabel::AppealToAuthority => "appeal to authority",
            TechniqueLabel::CausalOversimplification => "causal oversimplification",
            TechniqueLabel::BandwagonReductioAdHitlerum => "bandwagon,reductio_ad_hitlerum",
            TechniqueLabel::ThoughtTerminatingCliches => "thought-terminating cliches",
        }
    }
}

impl fmt::Display for TechniqueLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TechniqueLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTechnique(s.to_string()))
    }
}

impl From<TechniqueLabel> for String {
    fn from(t: TechniqueLabel) -> String {
        t.name().to_string()
    }
}

impl TryFrom<String> for TechniqueLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub id: u64,
    pub text: String,
}

impl Article {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanAnnotation {
    pub article_id: u64,
    pub technique: TechniqueLabel,
    pub span_start: usize,
    pub span_end: usize,
}

impl SpanAnnotation {
    pub fn key(&self) -> SegmentKey {
        SegmentKey {
            article_id: self.article_id,
            span_start: self.span_start,
            span_end: self.span_end,
        }
    }
}

/// One parsed annotation row together with its 1-based line number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotationRow {
    pub line: usize,
    pub annotation: SpanAnnotation,
}

/// `articleId:start:end`, the identity of a span across every feature file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentKey {
    pub article_id: u64,
    pub span_start: usize,
    pub span_end: usize,
}

impl fmt::Display for SegmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}",
            self.article_id, self.span_start, self.span_end
        )
    }
}

impl FromStr for SegmentKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed segment key {s:?}"));
        let mut parts = s.split(':');
        let (Some(a), Some(b), Some(c), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        Ok(SegmentKey {
            article_id: a.parse().map_err(|_| bad())?,
            span_start: b.parse().map_err(|_| bad())?,
            span_end: c.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub key: SegmentKey,
    pub surface: String,
    pub tokens: Vec<String>,
    pub left_context: Vec<String>,
    pub right_context: Vec<String>,
    pub gold: Option<TechniqueLabel>,
}

impl Segment {
    /// Context tokens followed by the span tokens followed by right context.
    pub fn tokens_with_context(&self) -> Vec<String> {
        self.left_context
            .iter()
            .chain(&self.tokens)
            .chain(&self.right_context)
            .cloned()
            .collect()
    }
}

fn article_id_from_filename(name: &str) -> Option<u64> {
    let stem = name.strip_prefix("article")?;
    let dot = stem.rfind('.')?;
    let (digits, ext) = stem.split_at(dot);
    if !ext.eq_ignore_ascii_case(".txt") || digits.is_empty() {
        return None;
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Loads every `article<ID>.txt` in `dir`, sorted by ascending id.
pub fn load_corpus(dir: &Path) -> Result<Vec<Article>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut by_id = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(id) = name.to_str().and_then(article_id_from_filename) else {
            continue;
        };
        let path = entry.path();
        let text = read_text(&path)?;
        if text.is_empty() {
            return Err(Error::parse(&path, 1, "article text is empty"));
        }
        if by_id.insert(id, text).is_some() {
            return Err(Error::DuplicateArticle(id));
        }
    }
    Ok(by_id
        .into_iter()
        .map(|(id, text)| Article { id, text })
        .collect())
}

/// Parses annotation rows, keeping line numbers for diagnostics.
pub fn parse_annotation_rows(path: &Path, contents: &str) -> Result<Vec<AnnotationRow>> {
    let mut rows = Vec::new();
    for (i, raw) in contents.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let num = |s: &str, what: &str| -> Result<u64> {
            s.trim()
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid {what} {s:?}")))
        };
        let article_id = num(fields[0], "article id")?;
        let technique: TechniqueLabel = fields[1].trim().parse()?;
        let span_start = num(fields[2], "span start")? as usize;
        let span_end = num(fields[3], "span end")? as usize;
        if span_start >= span_end {
            return Err(Error::parse(
                path,
                line,
                format!("span start {span_start} is not before span end {span_end}"),
            ));
        }
        rows.push(AnnotationRow {
            line,
            annotation: SpanAnnotation {
                article_id,
                technique,
                span_start,
                span_end,
            },
        });
    }
    Ok(rows)
}

pub fn load_annotation_rows(path: &Path) -> Result<Vec<AnnotationRow>> {
    let contents = read_text(path)?;
    parse_annotation_rows(path, &contents)
}

/// Loads a technique-classification TSV. Multi-label spans yield one entry per row.
pub fn load_annotations(path: &Path) -> Result<Vec<SpanAnnotation>> {
    Ok(load_annotation_rows(path)?
        .into_iter()
        .map(|r| r.annotation)
        .collect())
}

pub fn format_annotations(annotations: &[SpanAnnotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            a.article_id, a.technique, a.span_start, a.span_end
        ));
    }
    out
}

pub fn write_annotations(path: &Path, annotations: &[SpanAnnotation]) -> Result<()> {
    write_text(path, &format_annotations(annotations))
}

/// Drops control characters except tab/newline, maps those to spaces,
/// collapses space runs and trims.
pub fn clean_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for c in s.chars() {
        let c = match c {
            '\t' | '\n' => ' ',
            c if c.is_control() => continue,
            c => c,
        };
        if c == ' ' {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

/// Punctuation replaced by spaces before splitting.
pub const TOKEN_FILTERS: &str = "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n";

/// Lowercases, replaces [`TOKEN_FILTERS`] with spaces and splits on whitespace.
///
/// Control characters that [`clean_text`] deletes are deleted here too, so
/// tokenizing raw and cleaned text gives the same tokens.
pub fn tokenize(s: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in s.to_lowercase().chars() {
        if c.is_control() && c != '\t' && c != '\n' {
            continue;
        }
        if c.is_whitespace() || TOKEN_FILTERS.contains(c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn char_to_byte(text: &str, char_offset: usize) -> Option<usize> {
    if char_offset == 0 {
        return Some(0);
    }
    text.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .nth(char_offset)
}

/// Byte range of a char-offset span, validating it against the article.
pub fn span_byte_range(article: &Article, ann: &SpanAnnotation) -> Result<std::ops::Range<usize>> {
    let invalid = |reason: String| Error::InvalidSpan {
        article_id: ann.article_id,
        start: ann.span_start,
        end: ann.span_end,
        reason,
    };
    if ann.article_id != article.id {
        return Err(invalid(format!(
            "annotation refers to article {}",
            ann.article_id
        )));
    }
    if ann.span_start >= ann.span_end {
        return Err(invalid("empty or reversed span".into()));
    }
    let len = article.char_len();
    if ann.span_end > len {
        return Err(invalid(format!("article has only {len} characters")));
    }
    let start = char_to_byte(&article.text, ann.span_start).expect("checked against length");
    let end = char_to_byte(&article.text, ann.span_end).expect("checked against length");
    Ok(start..end)
}

pub fn extract_segment(
    article: &Article,
    ann: &SpanAnnotation,
    context_window: usize,
) -> Result<Segment> {
    let range = span_byte_range(article, ann)?;
    let surface = clean_text(&article.text[range.clone()]);
    let tokens = tokenize(&surface);
    let (left_context, right_context) = if context_window == 0 {
        (Vec::new(), Vec::new())
    } else {
        let before = tokenize(&article.text[..range.start]);
        let after = tokenize(&article.text[range.end..]);
        let skip = before.len().saturating_sub(context_window);
        (
            before.into_iter().skip(skip).collect(),
            after.into_iter().take(context_window).collect(),
        )
    };
    Ok(Segment {
        key: ann.key(),
        surface,
        tokens,
        left_context,
        right_context,
        gold: Some(ann.technique),
    })
}

/// A unique span with every gold technique attached to it, in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSpan {
    pub segment: Segment,
    pub labels: Vec<TechniqueLabel>,
}

/// Extracts one segment per distinct span, grouping multi-label rows.
///
/// Spans are returned in first-appearance order of the annotation list.
pub fn extract_labeled_spans(
    articles: &[Article],
    annotations: &[SpanAnnotation],
    context_window: usize,
) -> Result<Vec<LabeledSpan>> {
    let by_id: BTreeMap<u64, &Article> = articles.iter().map(|a| (a.id, a)).collect();
    let mut order: Vec<SegmentKey> = Vec::new();
    let mut grouped: BTreeMap<SegmentKey, LabeledSpan> = BTreeMap::new();
    for ann in annotations {
        let key = ann.key();
        if let Some(existing) = grouped.get_mut(&key) {
            existing.labels.push(ann.technique);
            continue;
        }
        let article = by_id
            .get(&ann.article_id)
            .ok_or_else(|| Error::InvalidSpan {
                article_id: ann.article_id,
                start: ann.span_start,
                end: ann.span_end,
                reason: "no such article in corpus".into(),
            })?;
        let segment = extract_segment(article, ann, context_window)?;
        order.push(key);
        grouped.insert(
            key,
            LabeledSpan {
                segment,
                labels: vec![ann.technique],
            },
        );
    }
    Ok(order
        .into_iter()
        .map(|k| grouped.remove(&k).expect("inserted above"))
        .collect())
}
