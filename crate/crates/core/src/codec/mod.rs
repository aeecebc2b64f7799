//! Text formats for generative extractors: the linearized event target,
//! the marker relation format, and multiple-choice relation prompts.
//!
//! Decoders treat model output as untrusted. They never fail; anything they
//! cannot use is dropped and reported as a [`DecodeIssue`].

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::EventId;

mod events;
mod marker;
pub mod prompts;
mod qa;
mod tags;

pub use events::{decode_events, encode_events, render_event_prompt};
pub use marker::{
    decode_marker_output, encode_marker_input, encode_marker_output, render_marker_prompt, strip_markers,
    MarkerInput,
};
pub use qa::{build_qa_prompt, option_letter, parse_qa_answer, parse_qa_answer_with, QaMapping, QaPrompt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("event `{0}` is outside the sentence being encoded")]
    EventOutsideSentence(EventId),
    #[error("cannot ask about {head} -> {tail}: pairs must be Drug -> Problem or Problem -> Problem")]
    InvalidPairTypes { head: String, tail: String },
    #[error("no option letter found in answer {0:?}")]
    UnparseableAnswer(String),
    #[error("option ({letter}) is not offered for this pair")]
    InvalidOption { letter: char },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueKind {
    EmptyOutput,
    SpanNotFound,
    UnknownLabel,
    UnknownTag,
    EmptyValue,
    StrayText,
    MissingTrigger,
    MissingSeparator,
    DrugArgument,
    MissingAssertion,
    OutOfOrder,
    UnknownRelation,
    MalformedLine,
    MalformedInstance,
    InvalidRelationTyping,
    UnresolvedMention,
    DuplicateRelation,
    OverlappingTriggers,
}

impl IssueKind {
    pub fn name(self) -> &'static str {
        match self {
            IssueKind::EmptyOutput => "EMPTY_OUTPUT",
            IssueKind::SpanNotFound => "SPAN_NOT_FOUND",
            IssueKind::UnknownLabel => "UNKNOWN_LABEL",
            IssueKind::UnknownTag => "UNKNOWN_TAG",
            IssueKind::EmptyValue => "EMPTY_VALUE",
            IssueKind::StrayText => "STRAY_TEXT",
            IssueKind::MissingTrigger => "MISSING_TRIGGER",
            IssueKind::MissingSeparator => "MISSING_SEPARATOR",
            IssueKind::DrugArgument => "DRUG_ARGUMENT",
            IssueKind::MissingAssertion => "MISSING_ASSERTION",
            IssueKind::OutOfOrder => "OUT_OF_ORDER",
            IssueKind::UnknownRelation => "UNKNOWN_RELATION",
            IssueKind::MalformedLine => "MALFORMED_LINE",
            IssueKind::MalformedInstance => "MALFORMED_INSTANCE",
            IssueKind::InvalidRelationTyping => "INVALID_RELATION_TYPING",
            IssueKind::UnresolvedMention => "UNRESOLVED_MENTION",
            IssueKind::DuplicateRelation => "DUPLICATE_RELATION",
            IssueKind::OverlappingTriggers => "OVERLAPPING_TRIGGERS",
        }
    }
}

/// Something a decoder or encoder had to drop or repair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeIssue {
    pub kind: IssueKind,
    pub detail: String,
}

impl DecodeIssue {
    pub(crate) fn new(kind: IssueKind, detail: impl Into<String>) -> Self {
        DecodeIssue {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for DecodeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.detail)
    }
}

/// True for the literal empty-result token.
pub(crate) fn is_none_token(s: &str) -> bool {
    s.trim() == "None"
}
