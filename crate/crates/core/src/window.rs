//! Relation context windows: the smallest run of consecutive sentences that
//! contains both triggers of a pair, subject to sentence and token limits.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Document, Event, EventId, EventType, ModelError, Relation, RelationType};

/// Counts tokens in raw text.
///
/// Implementations must be monotone: the count of a concatenation is at
/// least the count of each part.
pub trait Tokenizer {
    fn count(&self, text: &str) -> usize;
}

impl<F> Tokenizer for F
where
    F: Fn(&str) -> usize,
{
    fn count(&self, text: &str) -> usize {
        self(text)
    }
}

/// Whitespace tokens, each worth `ceil(chars / chars_per_unit)` subword
/// units. A model-free stand-in for a clinical subword vocabulary.
#[derive(Clone, Copy, Debug)]
pub struct SubwordEstimate {
    pub chars_per_unit: usize,
}

impl Default for SubwordEstimate {
    fn default() -> Self {
        SubwordEstimate { chars_per_unit: 6 }
    }
}

impl Tokenizer for SubwordEstimate {
    fn count(&self, text: &str) -> usize {
        let unit = self.chars_per_unit.max(1);
        text.split_whitespace()
            .map(|t| t.chars().count().div_ceil(unit))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowLimits {
    pub max_sentences: usize,
    pub max_tokens: usize,
}

impl Default for WindowLimits {
    fn default() -> Self {
        WindowLimits {
            max_sentences: 5,
            max_tokens: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("event `{0}` is not in the document")]
    UnknownEvent(EventId),
    #[error("event `{id}` cannot be placed in a sentence: {source}")]
    Unplaced {
        id: EventId,
        #[source]
        source: ModelError,
    },
    #[error("window spans {sentences} sentences (limit {limit})")]
    TooLong { sentences: usize, limit: usize },
    #[error("window has {tokens} tokens (limit {limit})")]
    TooManyTokens { tokens: usize, limit: usize },
}

/// A contiguous sentence range `[first, last]` of one document.
#[derive(Clone, Debug)]
pub struct ContextWindow<'a> {
    doc: &'a Document,
    pub first: usize,
    pub last: usize,
    pub token_count: usize,
    events: Vec<&'a Event>,
}

impl<'a> ContextWindow<'a> {
    /// Window over sentences `[first, last]` without limit checks.
    ///
    /// # Panics
    /// If the range is empty or past the document's last sentence.
    pub fn over(doc: &'a Document, first: usize, last: usize, tok: &dyn Tokenizer) -> Self {
        assert!(first <= last && last < doc.sentences.len(), "bad sentence range");
        let sentence_of = SentenceMap::new(doc);
        Self::with_map(doc, &sentence_of, first, last, tok)
    }

    fn with_map(doc: &'a Document, map: &SentenceMap, first: usize, last: usize, tok: &dyn Tokenizer) -> Self {
        let events = doc
            .events
            .iter()
            .zip(&map.0)
            .filter(|(_, s)| s.is_some_and(|s| (first..=last).contains(&s)))
            .map(|(e, _)| e)
            .collect();
        let mut w = ContextWindow {
            doc,
            first,
            last,
            token_count: 0,
            events,
        };
        w.token_count = tok.count(w.text());
        w
    }

    pub fn doc(&self) -> &'a Document {
        self.doc
    }

    /// Character range `[start, end)` of the window in the note.
    pub fn char_range(&self) -> (usize, usize) {
        (self.doc.sentences[self.first].start, self.doc.sentences[self.last].end)
    }

    /// Raw note text covered by the window.
    pub fn text(&self) -> &'a str {
        let (s, e) = self.char_range();
        self.doc.text.slice(s, e).expect("sentences lie within the note")
    }

    pub fn sentence_count(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn intra_sentence(&self) -> bool {
        self.first == self.last
    }

    /// Events whose trigger sentence lies in the window, in document order.
    pub fn events(&self) -> &[&'a Event] {
        &self.events
    }

    pub fn event(&self, id: &EventId) -> Option<&'a Event> {
        self.events.iter().copied().find(|e| &e.id == id)
    }

    /// Sentence ordinal of an event's trigger.
    pub fn sentence_of(&self, event: &Event) -> Option<usize> {
        self.doc.trigger_sentence(event).ok()
    }
}

/// Trigger sentence of every event, parallel to `doc.events`.
struct SentenceMap(Vec<Option<usize>>);

impl SentenceMap {
    fn new(doc: &Document) -> Self {
        SentenceMap(doc.events.iter().map(|e| doc.trigger_sentence(e).ok()).collect())
    }
}

fn placed(doc: &Document, event: &Event) -> Result<usize, WindowError> {
    doc.trigger_sentence(event).map_err(|source| WindowError::Unplaced {
        id: event.id.clone(),
        source,
    })
}

fn check_limits(window: ContextWindow<'_>, limits: WindowLimits) -> Result<ContextWindow<'_>, WindowError> {
    if window.token_count > limits.max_tokens {
        return Err(WindowError::TooManyTokens {
            tokens: window.token_count,
            limit: limits.max_tokens,
        });
    }
    Ok(window)
}

/// Smallest window holding both triggers, checked against `limits`.
pub fn build_window<'a>(
    doc: &'a Document,
    head: &Event,
    tail: &Event,
    tok: &dyn Tokenizer,
    limits: WindowLimits,
) -> Result<ContextWindow<'a>, WindowError> {
    for e in [head, tail] {
        if doc.event(&e.id).is_none() {
            return Err(WindowError::UnknownEvent(e.id.clone()));
        }
    }
    let (hs, ts) = (placed(doc, head)?, placed(doc, tail)?);
    let (first, last) = (hs.min(ts), hs.max(ts));
    let sentences = last - first + 1;
    if sentences > limits.max_sentences {
        return Err(WindowError::TooLong {
            sentences,
            limit: limits.max_sentences,
        });
    }
    check_limits(ContextWindow::over(doc, first, last, tok), limits)
}

/// Builds a window for a relation's endpoints.
pub fn relation_window<'a>(
    doc: &'a Document,
    relation: &Relation,
    tok: &dyn Tokenizer,
    limits: WindowLimits,
) -> Result<ContextWindow<'a>, WindowError> {
    let head = doc
        .event(&relation.head)
        .ok_or_else(|| WindowError::UnknownEvent(relation.head.clone()))?;
    let tail = doc
        .event(&relation.tail)
        .ok_or_else(|| WindowError::UnknownEvent(relation.tail.clone()))?;
    build_window(doc, head, tail, tok, limits)
}

/// A candidate (head, tail) pair with its minimal window.
#[derive(Clone, Debug)]
pub struct Candidate<'a> {
    pub head: &'a Event,
    pub tail: &'a Event,
    pub window: ContextWindow<'a>,
}

#[derive(Clone, Debug, Default)]
pub struct Candidates<'a> {
    pub pairs: Vec<Candidate<'a>>,
    /// Pairs dropped because their window broke a limit or a trigger could
    /// not be placed in a sentence.
    pub excluded: usize,
}

/// Every ordered Drug→Problem and Problem→Problem pair (head ≠ tail) whose
/// minimal window fits `limits`, in document order of head then tail.
pub fn enumerate_candidate_pairs<'a>(
    doc: &'a Document,
    tok: &dyn Tokenizer,
    limits: WindowLimits,
) -> Candidates<'a> {
    let map = SentenceMap::new(doc);
    let mut out = Candidates::default();
    // windows depend only on the sentence range; cache token counts
    let mut tokens: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (hi, head) in doc.events.iter().enumerate() {
        for (ti, tail) in doc.events.iter().enumerate() {
            if hi == ti || tail.event_type != EventType::Problem {
                continue;
            }
            let (Some(hs), Some(ts)) = (map.0[hi], map.0[ti]) else {
                out.excluded += 1;
                continue;
            };
            let (first, last) = (hs.min(ts), hs.max(ts));
            if last - first + 1 > limits.max_sentences {
                out.excluded += 1;
                continue;
            }
            let count = *tokens
                .entry((first, last))
                .or_insert_with(|| ContextWindow::with_map(doc, &map, first, last, tok).token_count);
            if count > limits.max_tokens {
                out.excluded += 1;
                continue;
            }
            out.pairs.push(Candidate {
                head,
                tail,
                window: ContextWindow::with_map(doc, &map, first, last, tok),
            });
        }
    }
    out
}

/// Inference-time deduplication rule: a prediction made in `window` counts
/// only if the head sits in the first sentence and the tail in the last (or
/// the reverse), or the window is a single sentence. Endpoints outside the
/// window never pass.
pub fn validity_filter(window: &ContextWindow<'_>, relation: &Relation) -> bool {
    let doc = window.doc();
    let sentence = |id: &EventId| doc.event(id).and_then(|e| doc.trigger_sentence(e).ok());
    let (Some(hs), Some(ts)) = (sentence(&relation.head), sentence(&relation.tail)) else {
        return false;
    };
    let range = window.first..=window.last;
    if !range.contains(&hs) || !range.contains(&ts) {
        return false;
    }
    (hs == window.first && ts == window.last)
        || (ts == window.first && hs == window.last)
        || window.first == window.last
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypeCoverage {
    pub total: usize,
    pub within_limits: usize,
    pub intra_sentence: usize,
}

impl TypeCoverage {
    fn add(&mut self, other: TypeCoverage) {
        self.total += other.total;
        self.within_limits += other.within_limits;
        self.intra_sentence += other.intra_sentence;
    }
}

/// How many gold relations fit the window limits and how many are
/// intra-sentence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverageStats {
    pub overall: TypeCoverage,
    pub by_type: BTreeMap<RelationType, TypeCoverage>,
    /// Relations whose endpoints are missing or cannot be placed.
    pub skipped: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl CoverageStats {
    pub fn coverage(&self) -> f64 {
        ratio(self.overall.within_limits, self.overall.total)
    }

    pub fn intra_fraction(&self) -> f64 {
        ratio(self.overall.intra_sentence, self.overall.total)
    }

    /// Associative, commutative combination of two reports.
    pub fn merge(&mut self, other: &CoverageStats) {
        self.overall.add(other.overall);
        for (ty, c) in &other.by_type {
            self.by_type.entry(*ty).or_default().add(*c);
        }
        self.skipped += other.skipped;
    }

    pub fn of_document(doc: &Document, tok: &dyn Tokenizer, limits: WindowLimits) -> CoverageStats {
        let mut stats = CoverageStats::default();
        for r in &doc.relations {
            let ends = doc.event(&r.head).zip(doc.event(&r.tail));
            let Some((h, t)) = ends else {
                stats.skipped += 1;
                continue;
            };
            let (Ok(hs), Ok(ts)) = (doc.trigger_sentence(h), doc.trigger_sentence(t)) else {
                stats.skipped += 1;
                continue;
            };
            let c = TypeCoverage {
                total: 1,
                within_limits: usize::from(build_window(doc, h, t, tok, limits).is_ok()),
                intra_sentence: usize::from(hs == ts),
            };
            stats.overall.add(c);
            stats.by_type.entry(r.rel_type).or_default().add(c);
        }
        stats
    }
}

pub fn coverage_report(docs: &[Document], tok: &dyn Tokenizer, limits: WindowLimits) -> CoverageStats {
    let mut stats = CoverageStats::default();
    for d in docs {
        stats.merge(&CoverageStats::of_document(d, tok, limits));
    }
    stats
}
