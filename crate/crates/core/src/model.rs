//! Domain types for problem/drug events, their arguments, and the relations
//! between them.
//!
//! All offsets are counted in Unicode scalar values (`char`s), matching what
//! annotation tools record. [`NoteText`] does the conversion to byte offsets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("span [{start}, {end}) is out of bounds for a note of {len} characters")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("span [{start}, {end}) is not covered by any sentence")]
    NotInSentence { start: usize, end: usize },
    #[error("unknown {kind} `{value}`")]
    UnknownName { kind: &'static str, value: String },
    #[error("`{value}` is not a valid {arg_type} label")]
    UnknownLabel { arg_type: ArgumentType, value: String },
    #[error("{0} is a span-only argument and carries no label")]
    NotLabeled(ArgumentType),
}

/// Note text indexed by character offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoteText {
    text: String,
    // byte offset of every char plus a trailing `text.len()` sentinel
    offsets: Vec<usize>,
}

impl NoteText {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        offsets.push(text.len());
        NoteText { text, offsets }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Length in characters.
    pub fn char_len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// Byte offset of a character offset; `char_len()` maps to `len()`.
    pub fn byte_offset(&self, char_offset: usize) -> Option<usize> {
        self.offsets.get(char_offset).copied()
    }

    /// Character offset of a byte offset, if it falls on a char boundary.
    pub fn char_offset(&self, byte_offset: usize) -> Option<usize> {
        self.offsets.binary_search(&byte_offset).ok()
    }

    /// Substring over the character range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Option<&str> {
        if start > end {
            return None;
        }
        let b0 = self.byte_offset(start)?;
        let b1 = self.byte_offset(end)?;
        Some(&self.text[b0..b1])
    }

    /// Builds a [`Span`] whose text is read from the note.
    pub fn span(&self, start: usize, end: usize) -> Result<Span, ModelError> {
        if start >= end || end > self.char_len() {
            return Err(ModelError::OutOfBounds {
                start,
                end,
                len: self.char_len(),
            });
        }
        let text = self.slice(start, end).expect("bounds checked").to_string();
        Ok(Span { start, end, text })
    }
}

impl From<&str> for NoteText {
    fn from(s: &str) -> Self {
        NoteText::new(s)
    }
}

impl From<String> for NoteText {
    fn from(s: String) -> Self {
        NoteText::new(s)
    }
}

/// Contiguous character interval `[start, end)` with its surface text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Span {
    pub fn new(start: usize, end: usize, text: impl Into<String>) -> Self {
        Span {
            start,
            end,
            text: text.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of character offsets shared with `other`.
    pub fn overlap(&self, other: &Span) -> usize {
        self.end
            .min(other.end)
            .saturating_sub(self.start.max(other.start))
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.overlap(other) > 0
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Same interval, ignoring text.
    pub fn same_offsets(&self, other: &Span) -> bool {
        self.start == other.start && self.end == other.end
    }
}

macro_rules! name_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident : $kind:literal {
            $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        $vis enum $name {
            $(
                #[serde(rename = $text)]
                $variant,
            )+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ModelError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text $(| $alias)* => Ok($name::$variant),)+
                    _ => Err(ModelError::UnknownName {
                        kind: $kind,
                        value: s.to_string(),
                    }),
                }
            }
        }
    };
}

name_enum! {
    pub enum EventType: "event type" {
        Problem => "Problem",
        Drug => "Drug",
    }
}

name_enum! {
    /// Argument types in the order they are rendered in generative targets.
    pub enum ArgumentType: "argument type" {
        Assertion => "Assertion",
        Anatomy => "Anatomy",
        Duration => "Duration",
        Frequency => "Frequency",
        Characteristics => "Characteristics",
        Change => "Change",
        Severity => "Severity",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArgumentKind {
    /// Normalized to a closed subtype vocabulary.
    Labeled,
    /// Value is a verbatim text span.
    SpanOnly,
}

impl ArgumentType {
    pub fn kind(self) -> ArgumentKind {
        match self {
            ArgumentType::Assertion | ArgumentType::Change | ArgumentType::Severity => {
                ArgumentKind::Labeled
            }
            _ => ArgumentKind::SpanOnly,
        }
    }

    pub fn is_labeled(self) -> bool {
        self.kind() == ArgumentKind::Labeled
    }

    /// Upper bound on how many of this argument a Problem may carry.
    /// `None` means unbounded.
    pub fn max_per_event(self) -> Option<usize> {
        match self {
            ArgumentType::Characteristics => None,
            _ => Some(1),
        }
    }

    pub fn is_required(self) -> bool {
        self == ArgumentType::Assertion
    }

    /// Vocabulary of a labeled argument type, empty for span-only types.
    pub fn vocabulary(self) -> &'static [&'static str] {
        match self {
            ArgumentType::Assertion => &[
                "present",
                "absent",
                "possible",
                "conditional",
                "hypothetical",
                "not_patient",
            ],
            ArgumentType::Change => &["worsening", "no_change", "improving", "resolved"],
            ArgumentType::Severity => &["mild", "moderate", "severe"],
            _ => &[],
        }
    }
}

name_enum! {
    pub enum AssertionValue: "assertion value" {
        Present => "present",
        Absent => "absent",
        Possible => "possible",
        Conditional => "conditional",
        Hypothetical => "hypothetical",
        NotPatient => "not_patient",
    }
}

name_enum! {
    pub enum ChangeValue: "change value" {
        Worsening => "worsening" | "worsened",
        NoChange => "no_change",
        Improving => "improving" | "improved",
        Resolved => "resolved",
    }
}

name_enum! {
    pub enum SeverityValue: "severity value" {
        Mild => "mild",
        Moderate => "moderate",
        Severe => "severe",
    }
}

/// A subtype label; the variant fixes which argument type it belongs to, so
/// out-of-vocabulary values cannot be constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubtypeLabel {
    Assertion(AssertionValue),
    Change(ChangeValue),
    Severity(SeverityValue),
}

impl SubtypeLabel {
    pub fn arg_type(self) -> ArgumentType {
        match self {
            SubtypeLabel::Assertion(_) => ArgumentType::Assertion,
            SubtypeLabel::Change(_) => ArgumentType::Change,
            SubtypeLabel::Severity(_) => ArgumentType::Severity,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubtypeLabel::Assertion(v) => v.as_str(),
            SubtypeLabel::Change(v) => v.as_str(),
            SubtypeLabel::Severity(v) => v.as_str(),
        }
    }

    /// Parses `value` against the vocabulary of `arg_type`.
    pub fn parse(arg_type: ArgumentType, value: &str) -> Result<Self, ModelError> {
        let unknown = || ModelError::UnknownLabel {
            arg_type,
            value: value.to_string(),
        };
        match arg_type {
            ArgumentType::Assertion => value
                .parse()
                .map(SubtypeLabel::Assertion)
                .map_err(|_| unknown()),
            ArgumentType::Change => value
                .parse()
                .map(SubtypeLabel::Change)
                .map_err(|_| unknown()),
            ArgumentType::Severity => value
                .parse()
                .map(SubtypeLabel::Severity)
                .map_err(|_| unknown()),
            other => Err(ModelError::NotLabeled(other)),
        }
    }

    /// Every label of a labeled argument type.
    pub fn all_for(arg_type: ArgumentType) -> Vec<SubtypeLabel> {
        match arg_type {
            ArgumentType::Assertion => AssertionValue::ALL
                .iter()
                .map(|&v| SubtypeLabel::Assertion(v))
                .collect(),
            ArgumentType::Change => ChangeValue::ALL
                .iter()
                .map(|&v| SubtypeLabel::Change(v))
                .collect(),
            ArgumentType::Severity => SeverityValue::ALL
                .iter()
                .map(|&v| SubtypeLabel::Severity(v))
                .collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for SubtypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Event argument. Labeled arguments carry a label (and optionally the span
/// it was read from); span-only arguments carry a span and no label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Argument {
    pub arg_type: ArgumentType,
    pub span: Option<Span>,
    pub label: Option<SubtypeLabel>,
}

impl Argument {
    pub fn labeled(label: SubtypeLabel) -> Self {
        Argument {
            arg_type: label.arg_type(),
            span: None,
            label: Some(label),
        }
    }

    pub fn span_only(arg_type: ArgumentType, span: Span) -> Self {
        Argument {
            arg_type,
            span: Some(span),
            label: None,
        }
    }

    pub fn assertion(value: AssertionValue) -> Self {
        Argument::labeled(SubtypeLabel::Assertion(value))
    }

    fn sort_key(&self) -> (ArgumentType, Option<SubtypeLabel>, usize, usize, String) {
        let (s, e, t) = match &self.span {
            Some(sp) => (sp.start, sp.end, sp.text.clone()),
            None => (0, 0, String::new()),
        };
        (self.arg_type, self.label, s, e, t)
    }
}

/// Opaque event identifier, unique within a document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        EventId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    pub event_type: EventType,
    pub trigger: Span,
    pub arguments: Vec<Argument>,
}

impl Event {
    pub fn new(id: impl Into<String>, event_type: EventType, trigger: Span) -> Self {
        Event {
            id: EventId::new(id),
            event_type,
            trigger,
            arguments: Vec::new(),
        }
    }

    pub fn with_argument(mut self, arg: Argument) -> Self {
        self.arguments.push(arg);
        self
    }

    pub fn arguments_of(&self, arg_type: ArgumentType) -> impl Iterator<Item = &Argument> {
        self.arguments.iter().filter(move |a| a.arg_type == arg_type)
    }

    pub fn assertion(&self) -> Option<AssertionValue> {
        self.arguments.iter().find_map(|a| match a.label {
            Some(SubtypeLabel::Assertion(v)) => Some(v),
            _ => None,
        })
    }

    /// Arguments in rendering order: by type, then by span start.
    pub fn sorted_arguments(&self) -> Vec<&Argument> {
        let mut args: Vec<&Argument> = self.arguments.iter().collect();
        args.sort_by_key(|a| a.sort_key());
        args
    }
}

name_enum! {
    pub enum RelationType: "relation type" {
        AdminFor => "AdminFor",
        NotAdminBecause => "NotAdminBecause" | "NotAdminBeause",
        Causes => "Causes",
        Improves => "Improves",
        Worsens => "Worsens",
        Pip => "PIP" | "Pip" | "ProblemIndicatesProblem",
    }
}

impl RelationType {
    pub fn head_type(self) -> EventType {
        match self {
            RelationType::Pip => EventType::Problem,
            _ => EventType::Drug,
        }
    }

    pub fn tail_type(self) -> EventType {
        EventType::Problem
    }

    pub fn pair_kind(self) -> PairKind {
        match self {
            RelationType::Pip => PairKind::ProblemProblem,
            _ => PairKind::DrugProblem,
        }
    }
}

/// Head/tail typing of a candidate pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    DrugProblem,
    ProblemProblem,
}

impl PairKind {
    pub fn of(head: EventType, tail: EventType) -> Option<PairKind> {
        match (head, tail) {
            (EventType::Drug, EventType::Problem) => Some(PairKind::DrugProblem),
            (EventType::Problem, EventType::Problem) => Some(PairKind::ProblemProblem),
            _ => None,
        }
    }
}

/// Directed, typed link between two events of the same document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub rel_type: RelationType,
    pub head: EventId,
    pub tail: EventId,
}

impl Relation {
    pub fn new(rel_type: RelationType, head: EventId, tail: EventId) -> Self {
        Relation {
            rel_type,
            head,
            tail,
        }
    }
}

/// Who produced a document's annotations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Gold,
    Predicted,
    Annotator(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Gold => f.write_str("gold"),
            Source::Predicted => f.write_str("predicted"),
            Source::Annotator(id) => write!(f, "annotator:{id}"),
        }
    }
}

/// Result of locating a span in the sentence segmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SentenceLookup {
    pub ordinal: usize,
    /// The span is not fully inside sentence `ordinal`.
    pub straddles: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: NoteText,
    pub sentences: Vec<Span>,
    pub events: Vec<Event>,
    pub relations: Vec<Relation>,
    pub source: Source,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<NoteText>, sentences: Vec<Span>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
            sentences,
            events: Vec::new(),
            relations: Vec::new(),
            source: Source::Gold,
        }
    }

    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.events.iter().find(|e| &e.id == id)
    }

    /// Index from event id to position in `events`; the first wins on
    /// duplicate ids.
    pub fn event_index(&self) -> HashMap<&EventId, usize> {
        let mut idx = HashMap::with_capacity(self.events.len());
        for (i, e) in self.events.iter().enumerate() {
            idx.entry(&e.id).or_insert(i);
        }
        idx
    }

    /// Ordinal of the sentence containing `span.start`.
    ///
    /// Spans starting in inter-sentence whitespace are attributed to the
    /// preceding sentence. `straddles` is set whenever the span is not fully
    /// inside the returned sentence.
    pub fn sentence_index(&self, span: &Span) -> Result<SentenceLookup, ModelError> {
        let len = self.text.char_len();
        if span.start >= span.end || span.end > len {
            return Err(ModelError::OutOfBounds {
                start: span.start,
                end: span.end,
                len,
            });
        }
        let after = self.sentences.partition_point(|s| s.start <= span.start);
        let ordinal = match after.checked_sub(1) {
            Some(i) => i,
            None => match self.sentences.first() {
                Some(first) if first.start < span.end => 0,
                _ => {
                    return Err(ModelError::NotInSentence {
                        start: span.start,
                        end: span.end,
                    })
                }
            },
        };
        let straddles = !self.sentences[ordinal].contains(span);
        Ok(SentenceLookup { ordinal, straddles })
    }

    /// Sentence ordinal of an event's trigger.
    pub fn trigger_sentence(&self, event: &Event) -> Result<usize, ModelError> {
        self.sentence_index(&event.trigger).map(|l| l.ordinal)
    }

    /// Id-free form used to compare documents up to id renaming.
    pub fn canonical(&self) -> CanonicalDocument {
        let mut order: Vec<usize> = (0..self.events.len()).collect();
        let keyed: Vec<CanonicalEvent> = self.events.iter().map(CanonicalEvent::from).collect();
        order.sort_by(|&a, &b| keyed[a].cmp(&keyed[b]).then(a.cmp(&b)));
        let mut rank: HashMap<&EventId, usize> = HashMap::new();
        for (r, &i) in order.iter().enumerate() {
            rank.entry(&self.events[i].id).or_insert(r);
        }
        let events = order.iter().map(|&i| keyed[i].clone()).collect();
        let mut relations: Vec<CanonicalRelation> = self
            .relations
            .iter()
            .map(|r| CanonicalRelation {
                rel_type: r.rel_type,
                head: rank.get(&r.head).copied(),
                tail: rank.get(&r.tail).copied(),
            })
            .collect();
        relations.sort();
        CanonicalDocument {
            text: self.text.as_str().to_string(),
            sentences: self.sentences.clone(),
            events,
            relations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalEvent {
    pub trigger: Span,
    pub event_type: EventType,
    pub arguments: Vec<(ArgumentType, Option<SubtypeLabel>, Option<Span>)>,
}

impl From<&Event> for CanonicalEvent {
    fn from(e: &Event) -> Self {
        CanonicalEvent {
            trigger: e.trigger.clone(),
            event_type: e.event_type,
            arguments: e
                .sorted_arguments()
                .into_iter()
                .map(|a| (a.arg_type, a.label, a.span.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalRelation {
    pub rel_type: RelationType,
    pub head: Option<usize>,
    pub tail: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalDocument {
    pub text: String,
    pub sentences: Vec<Span>,
    pub events: Vec<CanonicalEvent>,
    pub relations: Vec<CanonicalRelation>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        // sentences: [0,6) [7,13) [14,20) [21,27)
        let text = NoteText::new("Aaaaa. Bbbbb. Ccccc. Ddddd.");
        let sentences = vec![
            text.span(0, 6).unwrap(),
            text.span(7, 13).unwrap(),
            text.span(14, 20).unwrap(),
            text.span(21, 27).unwrap(),
        ];
        Document::new("d", text, sentences)
    }

    #[test]
    fn char_offsets_differ_from_bytes() {
        let t = NoteText::new("naïve pain");
        assert_eq!(t.char_len(), 10);
        assert_eq!(t.slice(6, 10), Some("pain"));
        assert_eq!(t.byte_offset(6), Some(7));
        assert_eq!(t.char_offset(7), Some(6));
        assert_eq!(t.char_offset(3), None);
    }

    #[test]
    fn sentence_index_inside() {
        let d = doc();
        let l = d.sentence_index(&Span::new(1, 3, "aa")).unwrap();
        assert_eq!(l, SentenceLookup { ordinal: 0, straddles: false });
    }

    #[test]
    fn sentence_index_first_char_of_sentence() {
        let d = doc();
        let l = d.sentence_index(&Span::new(21, 22, "D")).unwrap();
        assert_eq!(l, SentenceLookup { ordinal: 3, straddles: false });
    }

    #[test]
    fn sentence_index_straddle_reports_start_sentence() {
        let d = doc();
        let l = d.sentence_index(&Span::new(10, 16, "bb. Cc")).unwrap();
        assert_eq!(l, SentenceLookup { ordinal: 1, straddles: true });
    }

    #[test]
    fn sentence_index_out_of_bounds() {
        let d = doc();
        let err = d.sentence_index(&Span::new(25, 40, "")).unwrap_err();
        assert!(matches!(err, ModelError::OutOfBounds { len: 27, .. }));
    }

    #[test]
    fn labels_are_vocabulary_checked() {
        assert_eq!(
            SubtypeLabel::parse(ArgumentType::Assertion, "not_patient").unwrap(),
            SubtypeLabel::Assertion(AssertionValue::NotPatient)
        );
        assert!(SubtypeLabel::parse(ArgumentType::Assertion, "likely").is_err());
        assert!(SubtypeLabel::parse(ArgumentType::Severity, "present").is_err());
        assert!(SubtypeLabel::parse(ArgumentType::Anatomy, "back").is_err());
        for &ty in ArgumentType::ALL {
            let labels = SubtypeLabel::all_for(ty);
            let names: Vec<&str> = labels.iter().map(|l| l.as_str()).collect();
            assert_eq!(names, ty.vocabulary());
        }
    }

    #[test]
    fn relation_typing() {
        for &r in RelationType::ALL {
            assert_eq!(r.tail_type(), EventType::Problem);
        }
        assert_eq!(RelationType::Pip.head_type(), EventType::Problem);
        assert_eq!(RelationType::AdminFor.head_type(), EventType::Drug);
        assert_eq!("PIP".parse::<RelationType>().unwrap(), RelationType::Pip);
    }

    #[test]
    fn canonical_ignores_ids_and_argument_order() {
        let mut a = doc();
        let t = a.text.clone();
        a.events.push(
            Event::new("E1", EventType::Problem, t.span(0, 5).unwrap())
                .with_argument(Argument::assertion(AssertionValue::Present))
                .with_argument(Argument::span_only(ArgumentType::Anatomy, t.span(7, 12).unwrap())),
        );
        a.events.push(Event::new("E2", EventType::Drug, t.span(14, 19).unwrap()));
        a.relations.push(Relation::new(RelationType::AdminFor, "E2".into(), "E1".into()));

        let mut b = a.clone();
        b.events.reverse();
        b.events[1].arguments.reverse();
        for e in &mut b.events {
            e.id = EventId::new(format!("X{}", e.id));
        }
        b.relations[0].head = EventId::new("XE2");
        b.relations[0].tail = EventId::new("XE1");
        assert_eq!(a.canonical(), b.canonical());
    }
}
