//! Schema validation for annotated documents.
//!
//! Violations are data: [`validate_document`] never fails, it reports every
//! problem it finds with a machine-readable code and the offending element.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::model::{ArgumentType, Document, Event, EventType, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Error => "error",
            Level::Warning => "warning",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "code", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    SentenceLayout,
    DuplicateEventId,
    SpanOutOfBounds,
    SpanTextMismatch,
    TriggerOutsideSentence,
    DrugHasArgument,
    MissingRequired { arg_type: ArgumentType },
    Cardinality { arg_type: ArgumentType, max: usize, found: usize },
    LabelMissing { arg_type: ArgumentType },
    UnexpectedLabel { arg_type: ArgumentType },
    LabelTypeMismatch { arg_type: ArgumentType },
    SpanMissing { arg_type: ArgumentType },
    ArgumentCrossSentence { arg_type: ArgumentType },
    DuplicateTrigger,
    DanglingRelation,
    RelationSelfLoop,
    RelationTyping,
    DuplicateRelation,
    NonClosestPair,
}

impl ViolationCode {
    pub fn name(&self) -> &'static str {
        match self {
            ViolationCode::SentenceLayout => "SENTENCE_LAYOUT",
            ViolationCode::DuplicateEventId => "DUPLICATE_EVENT_ID",
            ViolationCode::SpanOutOfBounds => "SPAN_OUT_OF_BOUNDS",
            ViolationCode::SpanTextMismatch => "SPAN_TEXT_MISMATCH",
            ViolationCode::TriggerOutsideSentence => "TRIGGER_OUTSIDE_SENTENCE",
            ViolationCode::DrugHasArgument => "DRUG_HAS_ARGUMENT",
            ViolationCode::MissingRequired { .. } => "MISSING_REQUIRED",
            ViolationCode::Cardinality { .. } => "CARDINALITY",
            ViolationCode::LabelMissing { .. } => "LABEL_MISSING",
            ViolationCode::UnexpectedLabel { .. } => "UNEXPECTED_LABEL",
            ViolationCode::LabelTypeMismatch { .. } => "LABEL_TYPE_MISMATCH",
            ViolationCode::SpanMissing { .. } => "SPAN_MISSING",
            ViolationCode::ArgumentCrossSentence { .. } => "ARGUMENT_CROSS_SENTENCE",
            ViolationCode::DuplicateTrigger => "DUPLICATE_TRIGGER",
            ViolationCode::DanglingRelation => "DANGLING_RELATION",
            ViolationCode::RelationSelfLoop => "RELATION_SELF_LOOP",
            ViolationCode::RelationTyping => "RELATION_TYPING",
            ViolationCode::DuplicateRelation => "DUPLICATE_RELATION",
            ViolationCode::NonClosestPair => "NON_CLOSEST_PAIR",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationCode::Cardinality {
                arg_type,
                max,
                found,
            } => write!(f, "CARDINALITY({arg_type}, max={max}, found={found})"),
            ViolationCode::MissingRequired { arg_type }
            | ViolationCode::LabelMissing { arg_type }
            | ViolationCode::UnexpectedLabel { arg_type }
            | ViolationCode::LabelTypeMismatch { arg_type }
            | ViolationCode::SpanMissing { arg_type }
            | ViolationCode::ArgumentCrossSentence { arg_type } => {
                write!(f, "{}({arg_type})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Violation {
    /// Id of the offending element (`E3`, `R1`, `sentence[2]`, ...).
    pub element: String,
    #[serde(flatten)]
    pub code: ViolationCode,
    pub level: Level,
    pub message: String,
}

impl Violation {
    fn new(level: Level, element: impl Into<String>, code: ViolationCode, message: String) -> Self {
        Violation {
            element: element.into(),
            code,
            level,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.level == Level::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.level, self.element, self.code, self.message)
    }
}

/// True if `violations` should block downstream use. Warnings only block
/// in strict mode.
pub fn blocks(violations: &[Violation], strict: bool) -> bool {
    violations.iter().any(|v| strict || v.is_error())
}

/// Returns every schema violation in `doc`, sorted by element then code.
///
/// The result does not depend on the order of events, arguments, or
/// relations in the document.
pub fn validate_document(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    check_sentences(doc, &mut out);

    let mut seen_ids: HashMap<&str, usize> = HashMap::new();
    for e in &doc.events {
        *seen_ids.entry(e.id.as_str()).or_default() += 1;
    }
    for (id, n) in &seen_ids {
        if *n > 1 {
            out.push(Violation::new(
                Level::Error,
                *id,
                ViolationCode::DuplicateEventId,
                format!("{n} events share this id"),
            ));
        }
    }

    for e in &doc.events {
        check_event(doc, e, &mut out);
    }
    check_duplicate_triggers(doc, &mut out);
    check_relations(doc, &mut out);

    out.sort();
    out.dedup();
    out
}

fn check_sentences(doc: &Document, out: &mut Vec<Violation>) {
    let len = doc.text.char_len();
    for (i, s) in doc.sentences.iter().enumerate() {
        let element = format!("sentence[{i}]");
        if s.start >= s.end || s.end > len {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::SentenceLayout,
                format!("sentence [{}, {}) is empty or out of bounds", s.start, s.end),
            ));
            continue;
        }
        if i > 0 && doc.sentences[i - 1].end > s.start {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::SentenceLayout,
                "sentences are unsorted or overlapping".to_string(),
            ));
        }
    }
}

fn check_span(doc: &Document, element: &str, what: &str, span: &Span, out: &mut Vec<Violation>) -> bool {
    match doc.text.slice(span.start, span.end) {
        Some(_) if span.is_empty() => {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::SpanOutOfBounds,
                format!("{what} span [{}, {}) is empty", span.start, span.end),
            ));
            false
        }
        None => {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::SpanOutOfBounds,
                format!(
                    "{what} span [{}, {}) exceeds note length {}",
                    span.start,
                    span.end,
                    doc.text.char_len()
                ),
            ));
            false
        }
        Some(actual) if actual != span.text => {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::SpanTextMismatch,
                format!("{what} text {:?} does not match note text {:?}", span.text, actual),
            ));
            false
        }
        Some(_) => true,
    }
}

fn check_event(doc: &Document, e: &Event, out: &mut Vec<Violation>) {
    let element = e.id.as_str();
    let trigger_sentence = if check_span(doc, element, "trigger", &e.trigger, out) {
        match doc.sentence_index(&e.trigger) {
            Ok(l) if !l.straddles => Some(l.ordinal),
            _ => {
                out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::TriggerOutsideSentence,
                    "trigger is not inside exactly one sentence".to_string(),
                ));
                None
            }
        }
    } else {
        None
    };

    match e.event_type {
        EventType::Drug => {
            if !e.arguments.is_empty() {
                out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::DrugHasArgument,
                    format!("drug event carries {} argument(s)", e.arguments.len()),
                ));
            }
        }
        EventType::Problem => {
            let mut counts: BTreeMap<ArgumentType, usize> = BTreeMap::new();
            for a in &e.arguments {
                *counts.entry(a.arg_type).or_default() += 1;
            }
            for &ty in ArgumentType::ALL {
                let found = counts.get(&ty).copied().unwrap_or(0);
                if ty.is_required() && found == 0 {
                    out.push(Violation::new(
                        Level::Error,
                        element,
                        ViolationCode::MissingRequired { arg_type: ty },
                        format!("problem event has no {ty}"),
                    ));
                }
                if let Some(max) = ty.max_per_event() {
                    if found > max {
                        // Corpus data is known to exceed the guideline's
                        // at-most-one for these span-only types.
                        let level = match ty {
                            ArgumentType::Anatomy
                            | ArgumentType::Duration
                            | ArgumentType::Frequency => Level::Warning,
                            _ => Level::Error,
                        };
                        out.push(Violation::new(
                            level,
                            element,
                            ViolationCode::Cardinality {
                                arg_type: ty,
                                max,
                                found,
                            },
                            format!("at most {max} {ty} allowed, found {found}"),
                        ));
                    }
                }
            }
        }
    }

    for a in &e.arguments {
        let ty = a.arg_type;
        if ty.is_labeled() {
            match a.label {
                None => out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::LabelMissing { arg_type: ty },
                    format!("{ty} argument has no label"),
                )),
                Some(l) if l.arg_type() != ty => out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::LabelTypeMismatch { arg_type: ty },
                    format!("{ty} argument carries {} label `{l}`", l.arg_type()),
                )),
                Some(_) => {}
            }
        } else {
            if a.label.is_some() {
                out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::UnexpectedLabel { arg_type: ty },
                    format!("span-only {ty} argument carries a label"),
                ));
            }
            if a.span.is_none() {
                out.push(Violation::new(
                    Level::Error,
                    element,
                    ViolationCode::SpanMissing { arg_type: ty },
                    format!("span-only {ty} argument has no span"),
                ));
            }
        }
        if let Some(span) = &a.span {
            if check_span(doc, element, ty.as_str(), span, out) {
                if let Some(ts) = trigger_sentence {
                    let same = matches!(
                        doc.sentence_index(span),
                        Ok(l) if l.ordinal == ts && !l.straddles
                    );
                    if !same {
                        out.push(Violation::new(
                            Level::Warning,
                            element,
                            ViolationCode::ArgumentCrossSentence { arg_type: ty },
                            format!(
                                "{ty} span {:?} is not in the trigger's sentence {ts}",
                                span.text
                            ),
                        ));
                    }
                }
            }
        }
    }
}

fn check_duplicate_triggers(doc: &Document, out: &mut Vec<Violation>) {
    let mut groups: HashMap<(EventType, usize, usize), Vec<&Event>> = HashMap::new();
    for e in &doc.events {
        groups
            .entry((e.event_type, e.trigger.start, e.trigger.end))
            .or_default()
            .push(e);
    }
    for members in groups.values().filter(|m| m.len() > 1) {
        for e in members {
            out.push(Violation::new(
                Level::Warning,
                e.id.as_str(),
                ViolationCode::DuplicateTrigger,
                format!(
                    "{} events share the {} trigger [{}, {})",
                    members.len(),
                    e.event_type,
                    e.trigger.start,
                    e.trigger.end
                ),
            ));
        }
    }
}

fn check_relations(doc: &Document, out: &mut Vec<Violation>) {
    let index = doc.event_index();
    let mut seen: HashSet<(crate::model::RelationType, &str, &str)> = HashSet::new();
    let mut dup_reported: HashSet<(crate::model::RelationType, &str, &str)> = HashSet::new();

    for r in &doc.relations {
        let element = format!("{}:{}->{}", r.rel_type, r.head, r.tail);
        let (Some(&hi), Some(&ti)) = (index.get(&r.head), index.get(&r.tail)) else {
            out.push(Violation::new(
                Level::Error,
                element,
                ViolationCode::DanglingRelation,
                "relation endpoint is not an event of this document".to_string(),
            ));
            continue;
        };
        if r.head == r.tail {
            out.push(Violation::new(
                Level::Error,
                element.clone(),
                ViolationCode::RelationSelfLoop,
                "head and tail are the same event".to_string(),
            ));
        }
        let (head, tail) = (&doc.events[hi], &doc.events[ti]);
        if head.event_type != r.rel_type.head_type() || tail.event_type != r.rel_type.tail_type() {
            out.push(Violation::new(
                Level::Error,
                element.clone(),
                ViolationCode::RelationTyping,
                format!(
                    "{} needs {} -> {}, found {} -> {}",
                    r.rel_type,
                    r.rel_type.head_type(),
                    r.rel_type.tail_type(),
                    head.event_type,
                    tail.event_type
                ),
            ));
        }
        let key = (r.rel_type, r.head.as_str(), r.tail.as_str());
        if !seen.insert(key) && dup_reported.insert(key) {
            out.push(Violation::new(
                Level::Warning,
                element.clone(),
                ViolationCode::DuplicateRelation,
                "relation annotated more than once".to_string(),
            ));
        }
        if r.head != r.tail {
            check_closest(doc, head, tail, &element, out);
        }
    }
}

fn mention_key(e: &Event) -> (EventType, String) {
    (e.event_type, e.trigger.text.to_lowercase())
}

/// Only the closest mentions of a repeated concept should be linked.
fn check_closest(doc: &Document, head: &Event, tail: &Event, element: &str, out: &mut Vec<Violation>) {
    let sent = |e: &Event| doc.trigger_sentence(e).ok();
    let (Some(hs), Some(ts)) = (sent(head), sent(tail)) else {
        return;
    };
    let dist = hs.abs_diff(ts);
    let closer = |anchor: &Event, other_end: usize| {
        let key = mention_key(anchor);
        doc.events.iter().any(|e| {
            e.id != anchor.id
                && e.id != head.id
                && e.id != tail.id
                && mention_key(e) == key
                && sent(e).is_some_and(|s| s.abs_diff(other_end) < dist)
        })
    };
    if closer(head, ts) || closer(tail, hs) {
        out.push(Violation::new(
            Level::Warning,
            element,
            ViolationCode::NonClosestPair,
            "a closer mention of the same concept exists".to_string(),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn base() -> Document {
        let text = NoteText::new("Back pain on lupron. Rash noted.");
        let sentences = vec![text.span(0, 20).unwrap(), text.span(21, 32).unwrap()];
        Document::new("n1", text, sentences)
    }

    fn problem(doc: &Document, id: &str, s: usize, e: usize) -> Event {
        Event::new(id, EventType::Problem, doc.text.span(s, e).unwrap())
            .with_argument(Argument::assertion(AssertionValue::Present))
    }

    fn codes(v: &[Violation]) -> Vec<String> {
        v.iter().map(|v| v.code.to_string()).collect()
    }

    #[test]
    fn empty_document_is_valid() {
        assert!(validate_document(&base()).is_empty());
    }

    #[test]
    fn drug_with_argument() {
        let mut d = base();
        let anat = d.text.span(0, 4).unwrap();
        d.events.push(
            Event::new("E1", EventType::Drug, d.text.span(13, 19).unwrap())
                .with_argument(Argument::span_only(ArgumentType::Anatomy, anat)),
        );
        let v = validate_document(&d);
        assert_eq!(codes(&v), vec!["DRUG_HAS_ARGUMENT"]);
        assert_eq!(v[0].element, "E1");
        assert!(v[0].is_error());
    }

    #[test]
    fn two_assertions() {
        let mut d = base();
        let e = problem(&d, "E1", 5, 9).with_argument(Argument::assertion(AssertionValue::Absent));
        d.events.push(e);
        let v = validate_document(&d);
        assert_eq!(codes(&v), vec!["CARDINALITY(Assertion, max=1, found=2)"]);
        assert_eq!(
            v[0].code,
            ViolationCode::Cardinality {
                arg_type: ArgumentType::Assertion,
                max: 1,
                found: 2
            }
        );
    }

    #[test]
    fn missing_assertion_and_label_errors() {
        let mut d = base();
        let mut e = Event::new("E1", EventType::Problem, d.text.span(5, 9).unwrap());
        e.arguments.push(Argument {
            arg_type: ArgumentType::Severity,
            span: None,
            label: Some(SubtypeLabel::Change(ChangeValue::Resolved)),
        });
        e.arguments.push(Argument {
            arg_type: ArgumentType::Anatomy,
            span: None,
            label: Some(SubtypeLabel::Severity(SeverityValue::Mild)),
        });
        d.events.push(e);
        let got = codes(&validate_document(&d));
        assert_eq!(
            got,
            vec![
                "MISSING_REQUIRED(Assertion)",
                "UNEXPECTED_LABEL(Anatomy)",
                "LABEL_TYPE_MISMATCH(Severity)",
                "SPAN_MISSING(Anatomy)",
            ]
        );
    }

    #[test]
    fn duplicate_anatomy_is_a_warning_but_characteristics_are_unbounded() {
        let mut d = base();
        let back = d.text.span(0, 4).unwrap();
        let on = d.text.span(10, 12).unwrap();
        let e = problem(&d, "E1", 5, 9)
            .with_argument(Argument::span_only(ArgumentType::Anatomy, back.clone()))
            .with_argument(Argument::span_only(ArgumentType::Anatomy, on.clone()))
            .with_argument(Argument::span_only(ArgumentType::Characteristics, back))
            .with_argument(Argument::span_only(ArgumentType::Characteristics, on));
        d.events.push(e);
        let v = validate_document(&d);
        assert_eq!(codes(&v), vec!["CARDINALITY(Anatomy, max=1, found=2)"]);
        assert_eq!(v[0].level, Level::Warning);
        assert!(!blocks(&v, false));
        assert!(blocks(&v, true));
    }

    #[test]
    fn cross_sentence_argument_is_a_warning() {
        let mut d = base();
        let rash = d.text.span(21, 25).unwrap();
        d.events
            .push(problem(&d, "E1", 5, 9).with_argument(Argument::span_only(ArgumentType::Characteristics, rash)));
        let v = validate_document(&d);
        assert_eq!(codes(&v), vec!["ARGUMENT_CROSS_SENTENCE(Characteristics)"]);
        assert_eq!(v[0].level, Level::Warning);
    }

    #[test]
    fn span_errors() {
        let mut d = base();
        d.events
            .push(Event::new("E1", EventType::Drug, Span::new(13, 19, "Lupron")));
        d.events
            .push(Event::new("E2", EventType::Drug, Span::new(30, 40, "x")));
        let got = codes(&validate_document(&d));
        assert_eq!(got, vec!["SPAN_TEXT_MISMATCH", "SPAN_OUT_OF_BOUNDS"]);
    }

    #[test]
    fn trigger_crossing_sentences() {
        let mut d = base();
        d.events
            .push(Event::new("E1", EventType::Drug, d.text.span(13, 25).unwrap()));
        assert_eq!(codes(&validate_document(&d)), vec!["TRIGGER_OUTSIDE_SENTENCE"]);
    }

    #[test]
    fn duplicate_triggers_flag_every_member() {
        let mut d = base();
        d.events.push(Event::new("E1", EventType::Drug, d.text.span(13, 19).unwrap()));
        d.events.push(Event::new("E2", EventType::Drug, d.text.span(13, 19).unwrap()));
        let v = validate_document(&d);
        assert_eq!(codes(&v), vec!["DUPLICATE_TRIGGER", "DUPLICATE_TRIGGER"]);
        assert!(v.iter().all(|v| v.level == Level::Warning));
    }

    #[test]
    fn relation_checks() {
        let mut d = base();
        d.events.push(problem(&d, "E1", 5, 9));
        d.events.push(Event::new("E2", EventType::Drug, d.text.span(13, 19).unwrap()));
        d.relations.push(Relation::new(RelationType::AdminFor, "E2".into(), "E1".into()));
        assert!(validate_document(&d).is_empty());

        d.relations.push(Relation::new(RelationType::AdminFor, "E1".into(), "E2".into()));
        d.relations.push(Relation::new(RelationType::Pip, "E1".into(), "E1".into()));
        d.relations.push(Relation::new(RelationType::Causes, "E2".into(), "E9".into()));
        d.relations.push(Relation::new(RelationType::AdminFor, "E2".into(), "E1".into()));
        let got = codes(&validate_document(&d));
        assert_eq!(
            got,
            vec!["RELATION_TYPING", "DUPLICATE_RELATION", "DANGLING_RELATION", "RELATION_SELF_LOOP"]
        );
    }

    #[test]
    fn non_closest_pair_warns() {
        let text = NoteText::new("Pain. Lupron for pain.");
        let sentences = vec![text.span(0, 5).unwrap(), text.span(6, 22).unwrap()];
        let mut d = Document::new("n", text, sentences);
        d.events.push(problem(&d, "E1", 0, 4));
        d.events.push(Event::new("E2", EventType::Drug, d.text.span(6, 12).unwrap()));
        d.events.push(problem(&d, "E3", 17, 21));
        d.relations.push(Relation::new(RelationType::AdminFor, "E2".into(), "E1".into()));
        assert_eq!(codes(&validate_document(&d)), vec!["NON_CLOSEST_PAIR"]);
        d.relations[0].tail = "E3".into();
        assert!(validate_document(&d).is_empty());
    }

    #[test]
    fn order_independent() {
        let mut d = base();
        d.events.push(
            problem(&d, "E1", 5, 9)
                .with_argument(Argument::assertion(AssertionValue::Absent))
                .with_argument(Argument::span_only(ArgumentType::Anatomy, Span::new(0, 4, "Back"))),
        );
        d.events.push(
            Event::new("E2", EventType::Drug, d.text.span(13, 19).unwrap())
                .with_argument(Argument::assertion(AssertionValue::Present)),
        );
        d.events.push(Event::new("E3", EventType::Drug, d.text.span(13, 19).unwrap()));
        let a = validate_document(&d);
        d.events.reverse();
        for e in &mut d.events {
            e.arguments.reverse();
        }
        assert_eq!(a, validate_document(&d));
    }
}
