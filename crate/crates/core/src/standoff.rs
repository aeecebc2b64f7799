//! Standoff annotation files: a `.txt` note paired with a line-oriented
//! `.ann` file of `T` (span), `E` (event), `A` (attribute) and `R`
//! (relation) records.
//!
//! ```text
//! T1	Problem 10 14	pain
//! T2	Anatomy 5 9	back
//! E1	Problem:T1 Anatomy:T2
//! A1	Assertion E1 present
//! T3	Drug 20 26	lupron
//! E2	Drug:T3
//! R1	AdminFor Arg1:E2 Arg2:E1
//! ```
//!
//! Repeated argument roles on an `E` line carry numeric suffixes
//! (`Characteristics2`, `Characteristics3`, ...). Lines starting with `#`
//! are annotator notes and are skipped.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{
    Argument, ArgumentType, Document, Event, EventId, EventType, NoteText, Relation, RelationType,
    Source, Span, SubtypeLabel,
};
use crate::segment::SentenceSplitter;

#[derive(Debug, Error)]
pub enum StandoffError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: reference to missing id `{id}`")]
    DanglingReference { line: usize, id: String },
    #[error("line {line}: `{id}` has a discontinuous span, which is not supported")]
    DiscontinuousSpan { line: usize, id: String },
    #[error("line {line}: `{id}` text {found:?} does not match note text {expected:?}")]
    OffsetTextMismatch {
        line: usize,
        id: String,
        expected: String,
        found: String,
    },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: span `{id}` is not attached to any event")]
    UnattachedSpan { line: usize, id: String },
    #[error("cannot write {element}: {reason}")]
    UnwritableSpan { element: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: no matching .ann file")]
    MissingAnnotation { path: PathBuf },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<StandoffError>,
    },
}

/// Note text and its annotation file contents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StandoffFilePair {
    pub text: String,
    pub ann: String,
}

/// Text column of a `T` line: the span text with line-breaking whitespace
/// flattened to spaces.
fn flatten(text: &str) -> String {
    text.chars()
        .map(|c| if matches!(c, '\n' | '\r' | '\t') { ' ' } else { c })
        .collect()
}

struct SpanRecord {
    line: usize,
    type_name: String,
    span: Span,
    used: bool,
}

struct EventRecord {
    line: usize,
    id: String,
    event_type: EventType,
    trigger: String,
    args: Vec<(ArgumentType, String)>,
}

struct AttrRecord {
    line: usize,
    arg_type: ArgumentType,
    target: String,
    label: SubtypeLabel,
}

struct RelRecord {
    line: usize,
    rel_type: RelationType,
    head: String,
    tail: String,
}

fn malformed(line: usize, reason: impl Into<String>) -> StandoffError {
    StandoffError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

/// Strips a numeric disambiguation suffix from an argument role.
fn role_base(role: &str) -> &str {
    role.trim_end_matches(|c: char| c.is_ascii_digit())
}

fn split_ref(line: usize, token: &str) -> Result<(&str, &str), StandoffError> {
    token
        .split_once(':')
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| malformed(line, format!("expected `Name:Id`, found `{token}`")))
}

/// Parses a standoff pair into a [`Document`] with source [`Source::Gold`].
///
/// Events take the ids of their `E` lines. Argument order follows the `E`
/// line, followed by labels that have no span of their own.
pub fn parse_standoff(
    doc_id: &str,
    pair: &StandoffFilePair,
    splitter: &dyn SentenceSplitter,
) -> Result<Document, StandoffError> {
    let text = NoteText::new(pair.text.as_str());
    let mut spans: HashMap<String, SpanRecord> = HashMap::new();
    let mut events: Vec<EventRecord> = Vec::new();
    let mut event_ids: HashMap<String, usize> = HashMap::new();
    let mut attrs: Vec<AttrRecord> = Vec::new();
    let mut attr_ids: HashMap<String, usize> = HashMap::new();
    let mut rels: Vec<RelRecord> = Vec::new();
    let mut rel_ids: HashMap<String, usize> = HashMap::new();

    for (i, raw) in pair.ann.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut fields = raw.splitn(3, '\t');
        let id = fields.next().unwrap_or_default();
        let body = fields
            .next()
            .ok_or_else(|| malformed(line, "missing tab-separated body"))?;
        let dup = |line: usize| StandoffError::DuplicateId {
            line,
            id: id.to_string(),
        };
        match id.chars().next() {
            Some('T') => {
                let surface = fields
                    .next()
                    .ok_or_else(|| malformed(line, "T record without text column"))?;
                let mut parts = body.split(' ');
                let type_name = parts.next().unwrap_or_default();
                let offsets: Vec<&str> = parts.collect();
                if offsets.iter().any(|p| p.contains(';')) {
                    return Err(StandoffError::DiscontinuousSpan {
                        line,
                        id: id.to_string(),
                    });
                }
                let [s, e] = offsets.as_slice() else {
                    return Err(malformed(line, "expected `Type start end`"));
                };
                let start: usize = s
                    .parse()
                    .map_err(|_| malformed(line, format!("bad start offset `{s}`")))?;
                let end: usize = e
                    .parse()
                    .map_err(|_| malformed(line, format!("bad end offset `{e}`")))?;
                let span = text.span(start, end).map_err(|err| malformed(line, err.to_string()))?;
                if flatten(&span.text) != surface {
                    return Err(StandoffError::OffsetTextMismatch {
                        line,
                        id: id.to_string(),
                        expected: span.text,
                        found: surface.to_string(),
                    });
                }
                let rec = SpanRecord {
                    line,
                    type_name: type_name.to_string(),
                    span,
                    used: false,
                };
                if spans.insert(id.to_string(), rec).is_some() {
                    return Err(dup(line));
                }
            }
            Some('E') => {
                let mut tokens = body.split_whitespace();
                let (type_name, trigger) = split_ref(line, tokens.next().unwrap_or_default())?;
                let event_type: EventType = type_name
                    .parse()
                    .map_err(|e: crate::model::ModelError| malformed(line, e.to_string()))?;
                let mut args = Vec::new();
                for tok in tokens {
                    let (role, target) = split_ref(line, tok)?;
                    let arg_type: ArgumentType = role_base(role)
                        .parse()
                        .map_err(|e: crate::model::ModelError| malformed(line, e.to_string()))?;
                    args.push((arg_type, target.to_string()));
                }
                if event_ids.insert(id.to_string(), events.len()).is_some() {
                    return Err(dup(line));
                }
                events.push(EventRecord {
                    line,
                    id: id.to_string(),
                    event_type,
                    trigger: trigger.to_string(),
                    args,
                });
            }
            Some('A') | Some('M') => {
                let tokens: Vec<&str> = body.split_whitespace().collect();
                let [name, target, value] = tokens.as_slice() else {
                    return Err(malformed(line, "expected `Name E<id> value`"));
                };
                let arg_type: ArgumentType = name
                    .parse()
                    .map_err(|e: crate::model::ModelError| malformed(line, e.to_string()))?;
                let label = SubtypeLabel::parse(arg_type, value).map_err(|e| malformed(line, e.to_string()))?;
                if attr_ids.insert(id.to_string(), attrs.len()).is_some() {
                    return Err(dup(line));
                }
                attrs.push(AttrRecord {
                    line,
                    arg_type,
                    target: target.to_string(),
                    label,
                });
            }
            Some('R') => {
                let tokens: Vec<&str> = body.split_whitespace().collect();
                let [name, a1, a2] = tokens.as_slice() else {
                    return Err(malformed(line, "expected `Type Arg1:E<id> Arg2:E<id>`"));
                };
                let rel_type: RelationType = name
                    .parse()
                    .map_err(|e: crate::model::ModelError| malformed(line, e.to_string()))?;
                let (r1, head) = split_ref(line, a1)?;
                let (r2, tail) = split_ref(line, a2)?;
                if r1 != "Arg1" || r2 != "Arg2" {
                    return Err(malformed(line, "relation roles must be Arg1 and Arg2"));
                }
                if rel_ids.insert(id.to_string(), rels.len()).is_some() {
                    return Err(dup(line));
                }
                rels.push(RelRecord {
                    line,
                    rel_type,
                    head: head.to_string(),
                    tail: tail.to_string(),
                });
            }
            _ => return Err(malformed(line, format!("unsupported record `{id}`"))),
        }
    }

    let mut doc_events = Vec::with_capacity(events.len());
    for rec in &events {
        let dangling = |id: &str| StandoffError::DanglingReference {
            line: rec.line,
            id: id.to_string(),
        };
        let trig = spans.get_mut(&rec.trigger).ok_or_else(|| dangling(&rec.trigger))?;
        if trig.type_name != rec.event_type.as_str() {
            return Err(malformed(
                rec.line,
                format!(
                    "trigger `{}` has type {} but the event is {}",
                    rec.trigger, trig.type_name, rec.event_type
                ),
            ));
        }
        trig.used = true;
        let mut event = Event {
            id: EventId::new(rec.id.clone()),
            event_type: rec.event_type,
            trigger: trig.span.clone(),
            arguments: Vec::with_capacity(rec.args.len()),
        };
        for (arg_type, target) in &rec.args {
            let s = spans.get_mut(target).ok_or_else(|| dangling(target))?;
            s.used = true;
            event.arguments.push(Argument {
                arg_type: *arg_type,
                span: Some(s.span.clone()),
                label: None,
            });
        }
        doc_events.push(event);
    }

    for a in &attrs {
        let &idx = event_ids
            .get(&a.target)
            .ok_or_else(|| StandoffError::DanglingReference {
                line: a.line,
                id: a.target.clone(),
            })?;
        let event = &mut doc_events[idx];
        let slot = event
            .arguments
            .iter_mut()
            .find(|arg| arg.arg_type == a.arg_type && arg.label.is_none());
        match slot {
            Some(arg) => arg.label = Some(a.label),
            None => event.arguments.push(Argument::labeled(a.label)),
        }
    }

    if let Some((id, rec)) = spans
        .iter()
        .filter(|(_, r)| !r.used)
        .min_by_key(|(_, r)| r.line)
    {
        return Err(StandoffError::UnattachedSpan {
            line: rec.line,
            id: id.clone(),
        });
    }

    let resolve = |line: usize, id: &str| -> Result<EventId, StandoffError> {
        if event_ids.contains_key(id) {
            return Ok(EventId::new(id));
        }
        // a relation may point at a trigger span rather than its event
        events
            .iter()
            .find(|e| e.trigger == id)
            .map(|e| EventId::new(e.id.clone()))
            .ok_or_else(|| StandoffError::DanglingReference {
                line,
                id: id.to_string(),
            })
    };
    let mut relations = Vec::with_capacity(rels.len());
    for r in &rels {
        relations.push(Relation::new(
            r.rel_type,
            resolve(r.line, &r.head)?,
            resolve(r.line, &r.tail)?,
        ));
    }

    let sentences = splitter.split(&text);
    Ok(Document {
        doc_id: doc_id.to_string(),
        text,
        sentences,
        events: doc_events,
        relations,
        source: Source::Gold,
    })
}

/// Serializes a document. Ids are assigned in document order, so writing
/// the same document twice yields identical bytes.
pub fn write_standoff(doc: &Document) -> Result<StandoffFilePair, StandoffError> {
    use std::fmt::Write;

    let mut ann = String::new();
    let mut attrs = String::new();
    let mut next_t = 1usize;
    let mut next_a = 1usize;
    let mut e_ids: HashMap<&EventId, usize> = HashMap::new();

    let mut span_line = |ann: &mut String, element: &str, type_name: &str, span: &Span| {
        match doc.text.slice(span.start, span.end) {
            Some(actual) if actual == span.text && !span.is_empty() => {}
            _ => {
                return Err(StandoffError::UnwritableSpan {
                    element: element.to_string(),
                    reason: format!(
                        "span [{}, {}) {:?} does not match the note text",
                        span.start, span.end, span.text
                    ),
                })
            }
        }
        let id = next_t;
        next_t += 1;
        writeln!(
            ann,
            "T{id}\t{type_name} {} {}\t{}",
            span.start,
            span.end,
            flatten(&span.text)
        )
        .expect("write to string");
        Ok(id)
    };

    for (k, event) in doc.events.iter().enumerate() {
        let eid = k + 1;
        e_ids.entry(&event.id).or_insert(eid);
        let element = event.id.as_str();
        let trig = span_line(&mut ann, element, event.event_type.as_str(), &event.trigger)?;
        let mut eline = format!("E{eid}\t{}:T{trig}", event.event_type);
        let mut role_counts: HashMap<ArgumentType, usize> = HashMap::new();
        attrs.clear();
        for arg in event.sorted_arguments() {
            if let Some(span) = &arg.span {
                let t = span_line(&mut ann, element, arg.arg_type.as_str(), span)?;
                let n = role_counts.entry(arg.arg_type).or_default();
                *n += 1;
                if *n == 1 {
                    write!(eline, " {}:T{t}", arg.arg_type).expect("write to string");
                } else {
                    write!(eline, " {}{}:T{t}", arg.arg_type, n).expect("write to string");
                }
            }
            match (arg.arg_type.is_labeled(), arg.label, &arg.span) {
                (true, Some(label), _) => {
                    writeln!(attrs, "A{next_a}\t{} E{eid} {label}", arg.arg_type).expect("write to string");
                    next_a += 1;
                }
                (true, None, None) | (false, _, None) => {
                    return Err(StandoffError::UnwritableSpan {
                        element: element.to_string(),
                        reason: format!("{} argument has neither span nor label", arg.arg_type),
                    })
                }
                (false, Some(_), Some(_)) => {
                    return Err(StandoffError::UnwritableSpan {
                        element: element.to_string(),
                        reason: format!("span-only {} argument carries a label", arg.arg_type),
                    })
                }
                _ => {}
            }
        }
        ann.push_str(&eline);
        ann.push('\n');
        ann.push_str(&attrs);
    }

    for (i, r) in doc.relations.iter().enumerate() {
        let lookup = |id: &EventId| {
            e_ids.get(id).copied().ok_or_else(|| StandoffError::UnwritableSpan {
                element: format!("relation {}", i + 1),
                reason: format!("endpoint `{id}` is not an event of this document"),
            })
        };
        let (h, t) = (lookup(&r.head)?, lookup(&r.tail)?);
        writeln!(ann, "R{}\t{} Arg1:E{h} Arg2:E{t}", i + 1, r.rel_type).expect("write to string");
    }

    Ok(StandoffFilePair {
        text: doc.text.as_str().to_string(),
        ann,
    })
}

/// `.txt`/`.ann` paths of one note.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotePaths {
    pub doc_id: String,
    pub txt: PathBuf,
    pub ann: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StandoffError + '_ {
    move |source| StandoffError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Lists the note pairs of a corpus directory, sorted by basename.
/// A `.txt` without its `.ann` is an error.
pub fn list_corpus(dir: &Path) -> Result<Vec<NotePaths>, StandoffError> {
    let mut notes = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let ann = path.with_extension("ann");
        if !ann.is_file() {
            return Err(StandoffError::MissingAnnotation { path });
        }
        let doc_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        notes.push(NotePaths { doc_id, txt: path, ann });
    }
    notes.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(notes)
}

pub fn read_note(paths: &NotePaths, splitter: &dyn SentenceSplitter) -> Result<Document, StandoffError> {
    let pair = StandoffFilePair {
        text: fs::read_to_string(&paths.txt).map_err(io_err(&paths.txt))?,
        ann: fs::read_to_string(&paths.ann).map_err(io_err(&paths.ann))?,
    };
    parse_standoff(&paths.doc_id, &pair, splitter).map_err(|e| StandoffError::InFile {
        path: paths.ann.clone(),
        source: Box::new(e),
    })
}

/// Reads a whole corpus directory.
pub fn read_corpus(dir: &Path, splitter: &dyn SentenceSplitter) -> Result<Vec<Document>, StandoffError> {
    list_corpus(dir)?
        .iter()
        .map(|p| read_note(p, splitter))
        .collect()
}

/// Writes `<doc_id>.txt` and `<doc_id>.ann` into `dir`.
pub fn write_note(dir: &Path, doc: &Document) -> Result<(), StandoffError> {
    let pair = write_standoff(doc)?;
    let txt = dir.join(format!("{}.txt", doc.doc_id));
    let ann = dir.join(format!("{}.ann", doc.doc_id));
    fs::write(&txt, pair.text).map_err(io_err(&txt))?;
    fs::write(&ann, pair.ann).map_err(io_err(&ann))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AssertionValue;
    use crate::segment::RuleSplitter;

    fn pair(text: &str, ann: &str) -> StandoffFilePair {
        StandoffFilePair {
            text: text.to_string(),
            ann: ann.to_string(),
        }
    }

    #[test]
    fn empty_ann() {
        let d = parse_standoff("n", &pair("Nothing here.", ""), &RuleSplitter).unwrap();
        assert!(d.events.is_empty());
        assert!(d.relations.is_empty());
        assert_eq!(d.sentences.len(), 1);
    }

    #[test]
    fn single_drug() {
        let d = parse_standoff(
            "n",
            &pair("Start lupron today.", "T1\tDrug 6 12\tlupron\nE1\tDrug:T1\n"),
            &RuleSplitter,
        )
        .unwrap();
        assert_eq!(d.events.len(), 1);
        let e = &d.events[0];
        assert_eq!(e.event_type, EventType::Drug);
        assert_eq!(e.trigger, Span::new(6, 12, "lupron"));
        assert!(e.arguments.is_empty());
    }

    #[test]
    fn labels_and_suffixed_roles() {
        let text = "dry painful cough in chest.";
        let ann = "T1\tProblem 12 17\tcough\n\
                   T2\tCharacteristics 0 3\tdry\n\
                   T3\tCharacteristics 4 11\tpainful\n\
                   T4\tAnatomy 21 26\tchest\n\
                   E1\tProblem:T1 Characteristics:T2 Characteristics2:T3 Anatomy:T4\n\
                   A1\tAssertion E1 present\n\
                   A2\tChange E1 improved\n";
        let d = parse_standoff("n", &pair(text, ann), &RuleSplitter).unwrap();
        let e = &d.events[0];
        assert_eq!(e.arguments_of(ArgumentType::Characteristics).count(), 2);
        assert_eq!(e.assertion(), Some(AssertionValue::Present));
        assert_eq!(
            e.arguments_of(ArgumentType::Change).next().unwrap().label,
            Some(SubtypeLabel::Change(crate::model::ChangeValue::Improving))
        );
    }

    #[test]
    fn unicode_offsets() {
        let text = "Naïve pain.";
        let d = parse_standoff(
            "n",
            &pair(text, "T1\tProblem 6 10\tpain\nE1\tProblem:T1\nA1\tAssertion E1 present\n"),
            &RuleSplitter,
        )
        .unwrap();
        assert_eq!(d.events[0].trigger.text, "pain");
    }

    #[test]
    fn errors() {
        let text = "Start lupron today.";
        let cases: Vec<(&str, fn(&StandoffError) -> bool)> = vec![
            ("T1\tDrug 6 9;10 12\tlup ro\nE1\tDrug:T1\n", |e| {
                matches!(e, StandoffError::DiscontinuousSpan { line: 1, .. })
            }),
            ("T1\tDrug 6 12\tLupron\nE1\tDrug:T1\n", |e| {
                matches!(e, StandoffError::OffsetTextMismatch { line: 1, .. })
            }),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T9\n", |e| {
                matches!(e, StandoffError::DanglingReference { line: 2, .. })
            }),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T1\nA1\tAssertion E7 present\n", |e| {
                matches!(e, StandoffError::DanglingReference { line: 3, .. })
            }),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T1\nR1\tAdminFor Arg1:E1 Arg2:E5\n", |e| {
                matches!(e, StandoffError::DanglingReference { line: 3, .. })
            }),
            ("T1 Drug 6 12 lupron\n", |e| matches!(e, StandoffError::MalformedLine { line: 1, .. })),
            ("T1\tDrug six 12\tlupron\n", |e| matches!(e, StandoffError::MalformedLine { line: 1, .. })),
            ("T1\tDrug 6 99\tlupron\n", |e| matches!(e, StandoffError::MalformedLine { line: 1, .. })),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T1\nA1\tAssertion E1 likely\n", |e| {
                matches!(e, StandoffError::MalformedLine { line: 3, .. })
            }),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T1\nA1\tAnatomy E1 back\n", |e| {
                matches!(e, StandoffError::MalformedLine { line: 3, .. })
            }),
            ("T1\tDrug 6 12\tlupron\nE1\tDrug:T1\nR1\tTreats Arg1:E1 Arg2:E1\n", |e| {
                matches!(e, StandoffError::MalformedLine { line: 3, .. })
            }),
            ("T1\tDrug 6 12\tlupron\n", |e| matches!(e, StandoffError::UnattachedSpan { line: 1, .. })),
            ("T1\tDrug 6 12\tlupron\nT1\tDrug 6 12\tlupron\n", |e| {
                matches!(e, StandoffError::DuplicateId { line: 2, .. })
            }),
            ("N1\tReference T1 Wiki:1\tx\n", |e| matches!(e, StandoffError::MalformedLine { line: 1, .. })),
        ];
        for (ann, check) in cases {
            let err = parse_standoff("n", &pair(text, ann), &RuleSplitter).unwrap_err();
            assert!(check(&err), "{ann:?} -> {err}");
        }
    }

    #[test]
    fn relation_may_reference_trigger_span() {
        let text = "Lupron for cancer.";
        let ann = "T1\tDrug 0 6\tLupron\nE1\tDrug:T1\nT2\tProblem 11 17\tcancer\nE2\tProblem:T2\n\
                   A1\tAssertion E2 present\nR1\tAdminFor Arg1:T1 Arg2:E2\n";
        let d = parse_standoff("n", &pair(text, ann), &RuleSplitter).unwrap();
        assert_eq!(d.relations[0].head, EventId::new("E1"));
    }

    #[test]
    fn write_counts_records() {
        let text = NoteText::new("Back pain noted.");
        let sentences = vec![text.span(0, 16).unwrap()];
        let mut d = Document::new("n", text, sentences);
        d.events.push(
            Event::new("X", EventType::Problem, d.text.span(5, 9).unwrap())
                .with_argument(Argument::assertion(AssertionValue::Present))
                .with_argument(Argument::span_only(ArgumentType::Anatomy, d.text.span(0, 4).unwrap())),
        );
        let out = write_standoff(&d).unwrap();
        let count = |p: char| out.ann.lines().filter(|l| l.starts_with(p)).count();
        assert_eq!((count('T'), count('E'), count('A'), count('R')), (2, 1, 1, 0));
        assert_eq!(
            out.ann,
            "T1\tProblem 5 9\tpain\nT2\tAnatomy 0 4\tBack\nE1\tProblem:T1 Anatomy:T2\nA1\tAssertion E1 present\n"
        );
        assert_eq!(write_standoff(&d).unwrap(), out);
    }

    #[test]
    fn write_empty() {
        let d = Document::new("n", "", vec![]);
        assert_eq!(write_standoff(&d).unwrap().ann, "");
    }

    #[test]
    fn write_rejects_mismatched_span() {
        let mut d = Document::new("n", "abc def", vec![]);
        d.events.push(Event::new("E1", EventType::Drug, Span::new(0, 3, "xyz")));
        assert!(matches!(
            write_standoff(&d),
            Err(StandoffError::UnwritableSpan { .. })
        ));
    }

    #[test]
    fn multiline_span_text_is_flattened() {
        let text = NoteText::new("left\nknee pain.");
        let mut d = Document::new("n", text, vec![]);
        d.sentences = RuleSplitter.split(&d.text);
        d.events.push(
            Event::new("E1", EventType::Problem, d.text.span(10, 14).unwrap())
                .with_argument(Argument::assertion(AssertionValue::Present))
                .with_argument(Argument::span_only(ArgumentType::Anatomy, d.text.span(0, 9).unwrap())),
        );
        let out = write_standoff(&d).unwrap();
        assert!(out.ann.contains("T2\tAnatomy 0 9\tleft knee\n"));
        let back = parse_standoff("n", &out, &RuleSplitter).unwrap();
        assert_eq!(back.canonical(), d.canonical());
    }

    #[test]
    fn round_trip_fixture() {
        let text = "Lupron for prostate cancer.\nASSESSMENT AND PLAN:\nFatigue and mild nausea on lupron.";
        let ann = "T1\tDrug 0 6\tLupron\nE1\tDrug:T1\n\
                   T2\tProblem 20 26\tcancer\nT3\tAnatomy 11 19\tprostate\nE2\tProblem:T2 Anatomy:T3\nA1\tAssertion E2 present\n\
                   T4\tProblem 49 56\tFatigue\nE3\tProblem:T4\nA2\tAssertion E3 present\n\
                   T5\tProblem 66 72\tnausea\nE4\tProblem:T5\nA3\tAssertion E4 present\nA4\tSeverity E4 mild\n\
                   T6\tDrug 76 82\tlupron\nE5\tDrug:T6\n\
                   R1\tAdminFor Arg1:E1 Arg2:E2\nR2\tCauses Arg1:E5 Arg2:E4\n";
        let d = parse_standoff("n", &pair(text, ann), &RuleSplitter).unwrap();
        assert_eq!(d.events.len(), 5);
        assert_eq!(d.relations.len(), 2);
        assert!(crate::validate::validate_document(&d).is_empty());
        let written = write_standoff(&d).unwrap();
        let again = parse_standoff("n", &written, &RuleSplitter).unwrap();
        assert_eq!(again.canonical(), d.canonical());
        assert_eq!(write_standoff(&again).unwrap(), written);
    }
}
