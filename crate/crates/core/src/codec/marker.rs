//! Marker relation format. Input is the window text with every trigger
//! wrapped in a type marker; output is one line per relation type:
//!
//! ```text
//! AdminFor: <Drug> lupron <Problem> prostate cancer [SEP] <Drug> xgeva <Problem> bone mets
//! Causes: <Drug> lupron <Problem> hot flashes
//! ```
//!
//! An empty result is the single token `None`.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

use crate::model::{Event, EventType, Relation, RelationType};
use crate::window::ContextWindow;

use super::prompts;
use super::tags::{tokenize, Token};
use super::{is_none_token, DecodeIssue, IssueKind};

static MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?(?:Drug|Problem)>").expect("valid regex"));

/// Marked-up window text plus any triggers that could not be marked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkerInput {
    pub text: String,
    pub issues: Vec<DecodeIssue>,
}

/// Wraps each trigger in the window as `<Drug>text</Drug>` or
/// `<Problem>text</Problem>`. Of overlapping triggers only the outermost
/// (earliest, then longest) is marked.
pub fn encode_marker_input(window: &ContextWindow<'_>) -> MarkerInput {
    mark(window, window.events())
}

pub(super) fn mark(window: &ContextWindow<'_>, events: &[&Event]) -> MarkerInput {
    let doc = window.doc();
    let (ws, we) = window.char_range();
    let mut triggers: Vec<&Event> = events
        .iter()
        .copied()
        .filter(|e| ws <= e.trigger.start && e.trigger.end <= we)
        .collect();
    triggers.sort_by_key(|e| (e.trigger.start, std::cmp::Reverse(e.trigger.end)));

    let mut issues = Vec::new();
    let mut text = String::with_capacity(window.text().len() + triggers.len() * 20);
    let mut cursor = ws;
    let slice = |a: usize, b: usize| doc.text.slice(a, b).expect("offsets inside the note");
    let mut kept: Option<&Event> = None;
    for e in triggers {
        if let Some(k) = kept.filter(|k| e.trigger.start < k.trigger.end) {
            issues.push(DecodeIssue::new(
                IssueKind::OverlappingTriggers,
                format!("{} overlaps {}; left unmarked", e.id, k.id),
            ));
            continue;
        }
        text.push_str(slice(cursor, e.trigger.start));
        let tag = e.event_type.as_str();
        text.push_str(&format!("<{tag}>{}</{tag}>", slice(e.trigger.start, e.trigger.end)));
        cursor = e.trigger.end;
        kept = Some(e);
    }
    text.push_str(slice(cursor, we));
    MarkerInput { text, issues }
}

/// Removes `<Drug>`, `</Drug>`, `<Problem>` and `</Problem>` markers.
pub fn strip_markers(marked: &str) -> String {
    MARKER.replace_all(marked, "").into_owned()
}

/// The marker-format prompt for an already marked window.
pub fn render_marker_prompt(marked: &str) -> String {
    prompts::render(prompts::RELATION_MARKER, &[("NOTE", marked)])
}

/// Renders the target lines for the relations whose endpoints both lie in
/// the window. Other relations are ignored.
pub fn encode_marker_output<'a, I>(window: &ContextWindow<'_>, relations: I) -> String
where
    I: IntoIterator<Item = &'a Relation>,
{
    let mut rows: Vec<(RelationType, &Event, &Event)> = relations
        .into_iter()
        .filter_map(|r| Some((r.rel_type, window.event(&r.head)?, window.event(&r.tail)?)))
        .collect();
    rows.sort_by_key(|(t, h, tl)| (*t, h.trigger.start, tl.trigger.start, h.trigger.end, tl.trigger.end));
    rows.dedup_by(|a, b| a.0 == b.0 && a.1.trigger == b.1.trigger && a.2.trigger == b.2.trigger);
    let mut lines = Vec::new();
    for &ty in RelationType::ALL {
        let instances: Vec<String> = rows
            .iter()
            .filter(|(t, _, _)| *t == ty)
            .map(|(_, h, t)| {
                format!(
                    "<{}> {} <{}> {}",
                    h.event_type, h.trigger.text, t.event_type, t.trigger.text
                )
            })
            .collect();
        if !instances.is_empty() {
            lines.push(format!("{ty}: {}", instances.join(" [SEP] ")));
        }
    }
    if lines.is_empty() {
        "None".to_string()
    } else {
        lines.join("\n")
    }
}

fn mention<'t>(tokens: &[Token<'t>]) -> Option<Vec<(EventType, &'t str)>> {
    let mut out = Vec::new();
    let mut pending: Option<EventType> = None;
    for tok in tokens {
        match *tok {
            Token::Close(_) => {}
            Token::Open(tag) => {
                if pending.is_some() {
                    return None;
                }
                pending = Some(tag.parse().ok()?);
            }
            Token::Text(text) => out.push((pending.take()?, text)),
            Token::Sep => return None,
        }
    }
    if pending.is_some() {
        return None;
    }
    Some(out)
}

fn distance(a: &Event, b: &Event) -> usize {
    b.trigger.start.saturating_sub(a.trigger.end).max(a.trigger.start.saturating_sub(b.trigger.end))
}

/// Parses marker-format output against the events of `window`.
///
/// Mentions resolve by exact trigger text and event type; when a text names
/// several events, the closest head/tail pair wins.
pub fn decode_marker_output(output: &str, window: &ContextWindow<'_>) -> (Vec<Relation>, Vec<DecodeIssue>) {
    let mut issues = Vec::new();
    let mut relations = Vec::new();
    if output.trim().is_empty() {
        issues.push(DecodeIssue::new(IssueKind::EmptyOutput, "empty output"));
        return (relations, issues);
    }
    if is_none_token(output) {
        return (relations, issues);
    }

    let mut seen = HashSet::new();
    for (n, line) in output.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || is_none_token(line) {
            continue;
        }
        let Some((name, body)) = line.split_once(':') else {
            issues.push(DecodeIssue::new(IssueKind::MalformedLine, format!("line {n}: no `Type:` prefix")));
            continue;
        };
        let rel_type: RelationType = match name.trim().parse() {
            Ok(t) => t,
            Err(_) => {
                issues.push(DecodeIssue::new(
                    IssueKind::UnknownRelation,
                    format!("line {n}: {:?}", name.trim()),
                ));
                continue;
            }
        };
        if is_none_token(body) {
            continue;
        }
        for instance in body.split("[SEP]") {
            let instance = instance.trim();
            if instance.is_empty() {
                continue;
            }
            let mentions = match mention(&tokenize(instance)) {
                Some(m) if m.len() == 2 => m,
                _ => {
                    issues.push(DecodeIssue::new(
                        IssueKind::MalformedInstance,
                        format!("line {n}: {instance:?}"),
                    ));
                    continue;
                }
            };
            let ((ht, htext), (tt, ttext)) = (mentions[0], mentions[1]);
            if ht != rel_type.head_type() || tt != rel_type.tail_type() {
                issues.push(DecodeIssue::new(
                    IssueKind::InvalidRelationTyping,
                    format!("line {n}: {rel_type} cannot link {ht} -> {tt}"),
                ));
                continue;
            }
            let find = |ty: EventType, text: &str| -> Vec<&Event> {
                window
                    .events()
                    .iter()
                    .copied()
                    .filter(|e| e.event_type == ty && e.trigger.text == text)
                    .collect()
            };
            let (heads, tails) = (find(ht, htext), find(tt, ttext));
            let best = heads
                .iter()
                .flat_map(|h| tails.iter().map(move |t| (*h, *t)))
                .filter(|(h, t)| h.id != t.id)
                .min_by_key(|(h, t)| (distance(h, t), h.trigger.start, t.trigger.start));
            let Some((head, tail)) = best else {
                let missing = if heads.is_empty() { htext } else { ttext };
                issues.push(DecodeIssue::new(
                    IssueKind::UnresolvedMention,
                    format!("line {n}: {missing:?} names no event in the window"),
                ));
                continue;
            };
            let rel = Relation::new(rel_type, head.id.clone(), tail.id.clone());
            if seen.insert(rel.clone()) {
                relations.push(rel);
            } else {
                issues.push(DecodeIssue::new(
                    IssueKind::DuplicateRelation,
                    format!("line {n}: {rel_type} {} -> {}", head.id, tail.id),
                ));
            }
        }
    }
    (relations, issues)
}
