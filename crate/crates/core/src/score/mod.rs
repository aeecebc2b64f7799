//! Relaxed-match scoring, inter-annotator agreement, and the paired
//! bootstrap test.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::Document;
use crate::validate::{blocks, validate_document};

mod bootstrap;
mod matching;
mod report;

pub use bootstrap::{bootstrap_test, ResampleMethod, SigTestResult, DEFAULT_ITERATIONS};
pub use matching::{match_documents, triggers_equivalent, MatchOptions, Matching, Strategy};
pub use report::{Category, CountTable, Counts, Micro, ScoreReport, ScoreRow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("TEXT_MISMATCH: note `{doc_id}` has different text in gold and prediction")]
    TextMismatch { doc_id: String },
    #[error("UNALIGNED_CORPORA: missing predictions for {missing_pred:?}, missing gold for {missing_gold:?}")]
    UnalignedCorpora {
        missing_pred: Vec<String>,
        missing_gold: Vec<String>,
    },
    #[error("note `{doc_id}` has {errors} schema error(s) and strict scoring is on")]
    Invalid { doc_id: String, errors: usize },
    #[error("MISALIGNED_SAMPLES: {0}")]
    MisalignedSamples(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    pub matching: MatchOptions,
    /// Refuse to score notes with schema errors.
    pub strict: bool,
}

/// Counts for one note.
#[derive(Clone, Debug, PartialEq)]
pub struct NoteScore {
    pub doc_id: String,
    pub report: ScoreReport,
}

fn pair_up<'a>(gold: &'a [Document], pred: &'a [Document]) -> Result<Vec<(&'a Document, &'a Document)>, ScoreError> {
    let g: BTreeMap<&str, &Document> = gold.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let p: BTreeMap<&str, &Document> = pred.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let missing_pred: Vec<String> = g.keys().filter(|k| !p.contains_key(*k)).map(|k| k.to_string()).collect();
    let missing_gold: Vec<String> = p.keys().filter(|k| !g.contains_key(*k)).map(|k| k.to_string()).collect();
    if !missing_pred.is_empty() || !missing_gold.is_empty() || g.len() != gold.len() || p.len() != pred.len() {
        return Err(ScoreError::UnalignedCorpora {
            missing_pred,
            missing_gold,
        });
    }
    Ok(g.into_iter().map(|(k, d)| (d, p[k])).collect())
}

fn check(doc: &Document) -> Result<(), ScoreError> {
    let v = validate_document(doc);
    if blocks(&v, false) {
        return Err(ScoreError::Invalid {
            doc_id: doc.doc_id.clone(),
            errors: v.iter().filter(|v| v.is_error()).count(),
        });
    }
    Ok(())
}

/// Scores each note separately, in doc-id order.
pub fn score_notes(gold: &[Document], pred: &[Document], opts: ScoreOptions) -> Result<Vec<NoteScore>, ScoreError> {
    let pairs = pair_up(gold, pred)?;
    pairs
        .par_iter()
        .map(|(g, p)| {
            if opts.strict {
                check(g)?;
                check(p)?;
            }
            let m = match_documents(g, p, opts.matching)?;
            Ok(NoteScore {
                doc_id: g.doc_id.clone(),
                report: ScoreReport::from_counts(m.counts),
            })
        })
        .collect()
}

/// Pools counts over all notes of two corpora aligned by doc id.
pub fn score(gold: &[Document], pred: &[Document], opts: ScoreOptions) -> Result<ScoreReport, ScoreError> {
    let mut total = ScoreReport::default();
    for note in score_notes(gold, pred, opts)? {
        total.merge(&note.report.counts);
    }
    Ok(total)
}

/// Agreement between two annotators, scoring `b` against `a`.
pub fn iaa(a: &[Document], b: &[Document], opts: ScoreOptions) -> Result<ScoreReport, ScoreError> {
    score(a, b, opts)
}

/// Per-note F1 of one micro aggregate, as bootstrap input.
pub fn per_note_f1(notes: &[NoteScore], which: Micro) -> Vec<(String, f64)> {
    notes
        .iter()
        .map(|n| (n.doc_id.clone(), n.report.micro(which).f1()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Event, EventType, NoteText, Relation, RelationType};

    fn note(id: &str) -> Document {
        let text = NoteText::new("Lupron for cancer and pain.");
        let sentences = vec![text.span(0, text.char_len()).unwrap()];
        let mut d = Document::new(id, text.clone(), sentences);
        d.events = vec![
            Event::new("E1", EventType::Drug, text.span(0, 6).unwrap()),
            Event::new("E2", EventType::Problem, text.span(11, 17).unwrap())
                .with_argument(crate::model::Argument::assertion(crate::model::AssertionValue::Present)),
            Event::new("E3", EventType::Problem, text.span(22, 26).unwrap())
                .with_argument(crate::model::Argument::assertion(crate::model::AssertionValue::Present)),
        ];
        d.relations = vec![
            Relation::new(RelationType::AdminFor, "E1".into(), "E2".into()),
            Relation::new(RelationType::AdminFor, "E1".into(), "E3".into()),
        ];
        d
    }

    #[test]
    fn identity_is_perfect() {
        let g = vec![note("a"), note("b")];
        let r = score(&g, &g, ScoreOptions::default()).unwrap();
        assert!(r.rows().iter().all(|row| row.f1 == 1.0));
    }

    #[test]
    fn one_of_two_relations() {
        let g = vec![note("a")];
        let mut p = g.clone();
        p[0].relations.pop();
        let r = score(&g, &p, ScoreOptions::default()).unwrap();
        let rel = r.micro(Micro::Relations);
        assert_eq!((rel.precision(), rel.recall()), (1.0, 0.5));
        assert!((rel.f1() - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn iaa_is_symmetric() {
        let a = vec![note("a")];
        let mut b = a.clone();
        b[0].events.remove(2);
        b[0].relations.pop();
        let ab = iaa(&a, &b, ScoreOptions::default()).unwrap().micro(Micro::Overall);
        let ba = iaa(&b, &a, ScoreOptions::default()).unwrap().micro(Micro::Overall);
        assert_eq!(ab.f1(), ba.f1());
        assert_eq!(ab.precision(), ba.recall());
    }

    #[test]
    fn unaligned() {
        let r = score(&[note("a")], &[note("b")], ScoreOptions::default());
        assert_eq!(
            r,
            Err(ScoreError::UnalignedCorpora {
                missing_pred: vec!["a".into()],
                missing_gold: vec!["b".into()],
            })
        );
    }

    #[test]
    fn strict_blocks_schema_errors() {
        let g = vec![note("a")];
        let mut p = g.clone();
        p[0].events[1].arguments.clear();
        let strict = ScoreOptions {
            strict: true,
            ..Default::default()
        };
        assert!(matches!(score(&g, &p, strict), Err(ScoreError::Invalid { .. })));
        assert!(score(&g, &p, ScoreOptions::default()).is_ok());
    }
}
