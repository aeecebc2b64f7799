//! Sentence-level event linearization:
//!
//! ```text
//! <Problem> pain <Assertion> present <Anatomy> back <s> neck [SEP] <Drug> lupron
//! ```
//!
//! Events appear in trigger order, arguments in a fixed type order, several
//! values of one type are joined by `<s>`, and a sentence without events is
//! the single token `None`.

use crate::model::{Argument, ArgumentType, Event, EventId, EventType, Span, SubtypeLabel};

use super::prompts;
use super::tags::{tokenize, Haystack, Occurrence, Token};
use super::{is_none_token, CodecError, DecodeIssue, IssueKind};

/// Linearizes the events of one sentence.
pub fn encode_events<'a, I>(sentence: &Span, events: I) -> Result<String, CodecError>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut events: Vec<&Event> = events.into_iter().collect();
    if let Some(e) = events.iter().find(|e| !sentence.contains(&e.trigger)) {
        return Err(CodecError::EventOutsideSentence(e.id.clone()));
    }
    if events.is_empty() {
        return Ok("None".to_string());
    }
    events.sort_by_key(|e| (e.trigger.start, e.trigger.end, e.event_type));
    let rendered: Vec<String> = events.iter().map(|e| render_event(e)).collect();
    Ok(rendered.join(" [SEP] "))
}

fn render_event(e: &Event) -> String {
    let mut out = format!("<{}> {}", e.event_type, e.trigger.text);
    if e.event_type == EventType::Drug {
        return out;
    }
    let args = e.sorted_arguments();
    for &ty in ArgumentType::ALL {
        let values: Vec<&str> = args
            .iter()
            .filter(|a| a.arg_type == ty)
            .filter_map(|a| match (ty.is_labeled(), a.label, &a.span) {
                (true, Some(l), _) => Some(l.as_str()),
                (false, _, Some(s)) => Some(s.text.as_str()),
                _ => None,
            })
            .collect();
        if !values.is_empty() {
            out.push_str(&format!(" <{ty}> {}", values.join(" <s> ")));
        }
    }
    out
}

/// The extraction prompt for one sentence.
pub fn render_event_prompt(sentence: &str) -> String {
    prompts::render(prompts::EVENT_EXTRACTION, &[("NOTE", sentence)])
}

#[derive(Default)]
struct Field<'a> {
    tag: &'a str,
    values: Vec<&'a str>,
}

#[derive(Default)]
struct RawEvent<'a> {
    fields: Vec<Field<'a>>,
    /// Started by an argument tag instead of a trigger; discarded.
    orphan: bool,
}

fn is_trigger_tag(tag: &str) -> bool {
    tag.parse::<EventType>().is_ok()
}

fn group<'a>(output: &'a str, issues: &mut Vec<DecodeIssue>) -> Vec<RawEvent<'a>> {
    let mut raws: Vec<RawEvent<'a>> = Vec::new();
    let mut current: Option<RawEvent<'a>> = None;
    for tok in tokenize(output) {
        match tok {
            Token::Sep => raws.extend(current.take()),
            Token::Close(_) => {}
            Token::Open("s") => match current.as_mut().and_then(|r| r.fields.last_mut()) {
                Some(f) => f.values.push(""),
                None => issues.push(DecodeIssue::new(IssueKind::StrayText, "`<s>` outside an event")),
            },
            Token::Open(tag) if is_trigger_tag(tag) => {
                if current.as_ref().is_some_and(|r| !r.orphan && !r.fields.is_empty()) {
                    issues.push(DecodeIssue::new(
                        IssueKind::MissingSeparator,
                        format!("`<{tag}>` starts a new event without [SEP]"),
                    ));
                }
                raws.extend(current.take());
                current = Some(RawEvent {
                    fields: vec![Field {
                        tag,
                        values: vec![""],
                    }],
                    orphan: false,
                });
            }
            Token::Open(tag) => {
                let raw = current.get_or_insert_with(|| {
                    issues.push(DecodeIssue::new(
                        IssueKind::MissingTrigger,
                        format!("`<{tag}>` appears before any trigger"),
                    ));
                    RawEvent {
                        fields: Vec::new(),
                        orphan: true,
                    }
                });
                raw.fields.push(Field {
                    tag,
                    values: vec![""],
                });
            }
            Token::Text(text) => match current.as_mut().and_then(|r| r.fields.last_mut()) {
                Some(f) => {
                    let slot = f.values.last_mut().expect("fields start with one value");
                    if slot.is_empty() {
                        *slot = text;
                    } else {
                        issues.push(DecodeIssue::new(IssueKind::StrayText, text.to_string()));
                    }
                }
                None => issues.push(DecodeIssue::new(IssueKind::StrayText, text.to_string())),
            },
        }
    }
    raws.extend(current);
    raws
}

fn gap(occ: &Occurrence, trigger: &Span) -> usize {
    trigger.start.saturating_sub(occ.end).max(occ.start.saturating_sub(trigger.end))
}

/// Parses model output for one sentence.
///
/// Every returned span was found verbatim in `sentence`. Triggers resolve
/// left to right, each at or after the previous trigger; argument spans
/// resolve to the occurrence nearest their trigger, and repeated values of
/// one type continue rightwards from the previous one.
pub fn decode_events(sentence: &Span, output: &str) -> (Vec<Event>, Vec<DecodeIssue>) {
    let mut issues = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    if output.trim().is_empty() {
        issues.push(DecodeIssue::new(IssueKind::EmptyOutput, "empty output"));
        return (events, issues);
    }
    if is_none_token(output) {
        return (events, issues);
    }

    let hay = Haystack::new(sentence);
    let mut anchor = sentence.start;
    for raw in group(output, &mut issues) {
        if raw.orphan {
            continue;
        }
        let Some((trigger_field, arg_fields)) = raw.fields.split_first() else {
            continue;
        };
        let event_type: EventType = trigger_field.tag.parse().expect("grouped on trigger tags");
        let trigger_text = trigger_field.values[0];
        if trigger_field.values.len() > 1 {
            issues.push(DecodeIssue::new(
                IssueKind::StrayText,
                format!("extra trigger values after {trigger_text:?}"),
            ));
        }
        if trigger_text.is_empty() || is_none_token(trigger_text) {
            issues.push(DecodeIssue::new(IssueKind::EmptyValue, format!("empty <{event_type}> trigger")));
            continue;
        }
        let occs = hay.occurrences(trigger_text);
        if occs.is_empty() {
            issues.push(DecodeIssue::new(
                IssueKind::SpanNotFound,
                format!("trigger {trigger_text:?} not in sentence"),
            ));
            continue;
        }
        let taken = |o: &Occurrence| {
            events
                .iter()
                .any(|e| e.event_type == event_type && e.trigger.start == o.start && e.trigger.end == o.end)
        };
        let chosen = match occs.iter().find(|o| o.start >= anchor && !taken(o)) {
            Some(o) => *o,
            None => {
                issues.push(DecodeIssue::new(
                    IssueKind::OutOfOrder,
                    format!("trigger {trigger_text:?} resolved before the previous trigger"),
                ));
                *occs.iter().find(|o| !taken(o)).unwrap_or(&occs[0])
            }
        };
        anchor = chosen.start;
        let mut event = Event {
            id: EventId::new(format!("E{}", events.len() + 1)),
            event_type,
            trigger: hay.span(chosen, trigger_text),
            arguments: Vec::new(),
        };

        for field in arg_fields {
            let arg_type: ArgumentType = match field.tag.parse() {
                Ok(t) => t,
                Err(_) => {
                    issues.push(DecodeIssue::new(IssueKind::UnknownTag, format!("<{}>", field.tag)));
                    continue;
                }
            };
            if event_type == EventType::Drug {
                issues.push(DecodeIssue::new(
                    IssueKind::DrugArgument,
                    format!("<{arg_type}> on drug {trigger_text:?}"),
                ));
                continue;
            }
            let mut previous: Option<Occurrence> = None;
            for &value in &field.values {
                if value.is_empty() {
                    issues.push(DecodeIssue::new(IssueKind::EmptyValue, format!("empty <{arg_type}> value")));
                    continue;
                }
                if is_none_token(value) {
                    continue;
                }
                if arg_type.is_labeled() {
                    match SubtypeLabel::parse(arg_type, value) {
                        Ok(label) => event.arguments.push(Argument::labeled(label)),
                        Err(_) => issues.push(DecodeIssue::new(
                            IssueKind::UnknownLabel,
                            format!("<{arg_type}> {value:?}"),
                        )),
                    }
                    continue;
                }
                let occs = hay.occurrences(value);
                let nearest = occs
                    .iter()
                    .min_by_key(|o| (gap(o, &event.trigger), o.start))
                    .copied();
                let pick = match previous {
                    Some(p) => occs.iter().find(|o| o.start > p.start).copied().or(nearest),
                    None => nearest,
                };
                match pick {
                    Some(o) => {
                        previous = Some(o);
                        event
                            .arguments
                            .push(Argument::span_only(arg_type, hay.span(o, value)));
                    }
                    None => issues.push(DecodeIssue::new(
                        IssueKind::SpanNotFound,
                        format!("<{arg_type}> {value:?} not in sentence"),
                    )),
                }
            }
        }
        if event_type == EventType::Problem && event.assertion().is_none() {
            issues.push(DecodeIssue::new(
                IssueKind::MissingAssertion,
                format!("problem {trigger_text:?} has no assertion"),
            ));
        }
        events.push(event);
    }
    (events, issues)
}
